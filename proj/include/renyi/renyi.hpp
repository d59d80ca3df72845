#pragma once

#include "renyi/error.hpp"
#include "renyi/linalg.hpp"
#include "renyi/random.hpp"
#include "renyi/parallel.hpp"
#include "renyi/qstate.hpp"
#include "renyi/entropy.hpp"
#include "renyi/entanglement.hpp"
#include "renyi/converse.hpp"
#include "renyi/protocols.hpp"
#include "renyi/propcheck.hpp"
#include "renyi/io.hpp"
