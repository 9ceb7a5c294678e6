// Umbrella header: pulls in the whole library.
#pragma once

#include <perorbit/errors.hpp>
#include <perorbit/logsum.hpp>
#include <perorbit/words.hpp>
#include <perorbit/systems.hpp>
#include <perorbit/orbits.hpp>
#include <perorbit/oracle.hpp>
#include <perorbit/thermo.hpp>
#include <perorbit/measures.hpp>
#include <perorbit/deviations.hpp>
