#include "partbelief/random_forest.hpp"

#include <string>

namespace partbelief {

namespace {

std::vector<double> random_positive(std::mt19937_64& rng, std::size_t n, bool allow_zeros) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> v(n);
    bool any = false;
    for (auto& x : v) {
        x = unit(rng);
        if (allow_zeros && unit(rng) < 0.15) x = 0.0;
        any = any || x > 0.0;
    }
    if (!any) v[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1.0;
    return v;
}

}  // namespace

Net random_forest(std::mt19937_64& rng, const RandomForestShape& shape) {
    std::uniform_int_distribution<std::size_t> node_count(1, shape.max_nodes);
    std::uniform_int_distribution<std::size_t> hyp_count(2, shape.max_hypotheses);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Net net;
    const std::size_t n = node_count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> hyps;
        const std::size_t k = hyp_count(rng);
        for (std::size_t h = 0; h + 1 < k; ++h) hyps.push_back("h" + std::to_string(h));
        hyps.emplace_back(kOther);

        std::optional<ParentLink> link;
        if (i > 0 && unit(rng) >= shape.new_root_probability) {
            const std::size_t p = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
            const auto& parent = net.node(p);
            const std::size_t cols = parent.hypotheses.size();
            std::vector<double> entries(k * cols);
            for (std::size_t c = 0; c < cols; ++c) {
                auto col = random_positive(rng, k, true);
                double sum = 0.0;
                for (double x : col) sum += x;
                for (std::size_t r = 0; r < k; ++r) entries[r * cols + c] = col[r] / sum;
            }
            link = ParentLink{parent.id, ConditionalPriorTable(parent.hypotheses, hyps, std::move(entries))};
        }
        std::optional<std::vector<double>> evidence;
        // Strictly positive evidence keeps every trial consistent.
        if (unit(rng) < shape.evidence_probability) evidence = random_positive(rng, k, false);
        const bool is_root = !link;
        const std::string id = "n" + std::to_string(i);
        net.instantiate_node(id, std::move(hyps), std::move(link), std::move(evidence));
        if (is_root && unit(rng) < 0.5) net.set_root_prior(id, random_positive(rng, k, false));
    }
    return net;
}

}  // namespace partbelief
