#pragma once

#include "mmv/core.hpp"
#include "mmv/csv.hpp"
#include "mmv/error.hpp"
#include "mmv/harness.hpp"
#include "mmv/iht.hpp"
#include "mmv/kv.hpp"
#include "mmv/music.hpp"
#include "mmv/nesta.hpp"
#include "mmv/projection.hpp"
#include "mmv/report.hpp"
#include "mmv/rng.hpp"
#include "mmv/smoothing.hpp"
#include "mmv/synth.hpp"
#include "mmv/types.hpp"
