#include "renyi/cli.hpp"

int main(int argc, char** argv) { return renyi::run_cli(argc, argv); }
