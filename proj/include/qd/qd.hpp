#pragma once

// Umbrella header for the whole suite.

#include "qd/archive.hpp"
#include "qd/bench.hpp"
#include "qd/config.hpp"
#include "qd/emitters.hpp"
#include "qd/env.hpp"
#include "qd/env_types.hpp"
#include "qd/geometry.hpp"
#include "qd/hash.hpp"
#include "qd/json_util.hpp"
#include "qd/layout_io.hpp"
#include "qd/policy.hpp"
#include "qd/qd_loop.hpp"
#include "qd/rng.hpp"
#include "qd/snapshot.hpp"
#include "qd/threading.hpp"
#include "qd/version.hpp"
#include "qd/worlds.hpp"
