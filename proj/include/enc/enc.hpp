#pragma once

// Single include for the whole library.

#include "enc/bitset.hpp"
#include "enc/conditional.hpp"
#include "enc/error.hpp"
#include "enc/frame.hpp"
#include "enc/generate.hpp"
#include "enc/io.hpp"
#include "enc/limits.hpp"
#include "enc/mass.hpp"
#include "enc/network.hpp"
#include "enc/oracle.hpp"
