#pragma once
// Umbrella header.

#include "fairscope/core.hpp"
#include "fairscope/empirical.hpp"
#include "fairscope/rng.hpp"
#include "fairscope/models.hpp"
#include "fairscope/explainers.hpp"
#include "fairscope/bias_metrics.hpp"
#include "fairscope/bias_explain.hpp"
#include "fairscope/shapley_bias.hpp"
