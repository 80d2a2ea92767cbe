#pragma once

#include "ergowass/bernstein.hpp"
#include "ergowass/dyadic.hpp"
#include "ergowass/error.hpp"
#include "ergowass/experiment.hpp"
#include "ergowass/measure.hpp"
#include "ergowass/parallel.hpp"
#include "ergowass/plot.hpp"
#include "ergowass/process.hpp"
#include "ergowass/rates.hpp"
#include "ergowass/rng.hpp"
#include "ergowass/transport.hpp"
