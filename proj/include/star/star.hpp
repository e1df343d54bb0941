#pragma once

#include "analysis.hpp"
#include "checkpoint.hpp"
#include "common.hpp"
#include "config.hpp"
#include "evaluation.hpp"
#include "model.hpp"
#include "patterns.hpp"
#include "regularization.hpp"
#include "synthetic.hpp"
#include "training.hpp"
#include "triple_store.hpp"
