#pragma once

#include "partbelief/bayes_net.hpp"

#include <cstddef>
#include <random>

namespace partbelief {

struct RandomForestShape {
    std::size_t max_nodes = 8;
    std::size_t max_hypotheses = 4;
    // Chance that a node after the first starts a new tree.
    double new_root_probability = 0.15;
    // Chance that a node carries posted evidence.
    double evidence_probability = 0.6;
};

// Random forest with random column-stochastic tables, root priors and
// evidence. Hypotheses are "h0".."h{k-2}" followed by "other".
Net random_forest(std::mt19937_64& rng, const RandomForestShape& shape = {});

}  // namespace partbelief
