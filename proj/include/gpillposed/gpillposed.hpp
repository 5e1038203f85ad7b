#pragma once

#include "bigreal.hpp"
#include "coalescence.hpp"
#include "dataset.hpp"
#include "dense.hpp"
#include "diagnostics.hpp"
#include "estimation.hpp"
#include "factorization.hpp"
#include "highprec.hpp"
#include "kernels.hpp"
#include "lininfo.hpp"
#include "objectives.hpp"
#include "posterior.hpp"
#include "trace.hpp"
