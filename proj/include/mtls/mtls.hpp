#pragma once

// Umbrella header: the full MTLS library.

#include "mtls/common.hpp"
#include "mtls/kernels.hpp"
#include "mtls/rng.hpp"
#include "mtls/io.hpp"
#include "mtls/solve.hpp"
#include "mtls/shifted_gram.hpp"
#include "mtls/jacobian.hpp"
#include "mtls/condition.hpp"
#include "mtls/structured.hpp"
#include "mtls/experiments.hpp"
#include "mtls/tables.hpp"
#include "mtls/report.hpp"
