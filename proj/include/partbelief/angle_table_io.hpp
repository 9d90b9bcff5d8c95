#pragma once

#include "partbelief/view_geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace partbelief {

// Angle table TSV:
//   # true_angle=<deg>\tbins=<B>\tresolution=<R>\tprior=<descriptor>
//   bin_lo_deg\tbin_hi_deg\tprobability
//   <lo>\t<hi>\t<p, 9 decimals>     (B rows)
void write_angle_table_tsv(std::ostream& out, const AngleLikelihoodTable& table, int resolution,
                           const std::string& prior);

struct AngleTableFile {
    AngleLikelihoodTable table;
    int resolution = 0;
    std::string prior;
};

// Parses the format above. Probabilities are renormalized to undo the
// 9-decimal rounding.
AngleTableFile read_angle_table_tsv(std::istream& in);

// Builds angle tables for one (bins, prior, resolution) setting, memoized in
// memory and optionally on disk (one TSV per true angle).
class AngleTableSource {
public:
    AngleTableSource(std::size_t bins, ViewpointPrior prior, int resolution,
                     std::optional<std::filesystem::path> cache_dir = std::nullopt);

    std::size_t bins() const { return bins_; }
    int resolution() const { return resolution_; }
    const ViewpointPrior& prior() const { return prior_; }

    const AngleLikelihoodTable& exact(double true_angle);
    // Mixture over tolerance_samples(theta, tol).
    AngleLikelihoodTable toleranced(double theta_deg, double tol_deg);

    std::filesystem::path cache_path(double true_angle) const;

private:
    const SphereGrid& grid();

    std::size_t bins_;
    ViewpointPrior prior_;
    int resolution_;
    std::optional<std::filesystem::path> cache_dir_;
    std::optional<SphereGrid> grid_;
    std::map<double, AngleLikelihoodTable> memo_;
};

}  // namespace partbelief
