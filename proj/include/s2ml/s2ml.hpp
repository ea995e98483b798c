#pragma once

#include "s2ml/data/libsvm.hpp"
#include "s2ml/data/sparse_matrix.hpp"
#include "s2ml/harness/experiment.hpp"
#include "s2ml/harness/fstar.hpp"
#include "s2ml/harness/svg.hpp"
#include "s2ml/harness/synthetic.hpp"
#include "s2ml/harness/trace.hpp"
#include "s2ml/model.hpp"
#include "s2ml/problems/config.hpp"
#include "s2ml/problems/quadratic.hpp"
#include "s2ml/solvers/run.hpp"
