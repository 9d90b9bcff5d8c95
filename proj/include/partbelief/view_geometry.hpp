#pragma once

#include "partbelief/knowledge_base.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace partbelief {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
};

double dot(Vec3 a, Vec3 b);
Vec3 cross(Vec3 a, Vec3 b);
double norm(Vec3 a);

// Degree-based trig that is exact at multiples of 90 degrees.
double cos_deg(double deg);
double sin_deg(double deg);

// Two unit axis vectors in the z = 0 plane at angles alpha1, alpha2 from +x.
struct StandardPairConfig {
    double alpha1_deg = 0.0;
    double alpha2_deg = 90.0;

    static StandardPairConfig from_actual(double actual_deg) { return {0.0, actual_deg}; }

    // alpha2 - alpha1 folded into [0, 180].
    double actual_angle() const;
    Vec3 axis1() const;
    Vec3 axis2() const;
};

// Observation point on the unit viewing sphere, radians.
struct Viewpoint {
    double elevation = 0.0;  // [-pi/2, pi/2]
    double azimuth = 0.0;    // [0, 2 pi)

    Vec3 direction() const;
};

inline constexpr double kDegenerateToleranceDeg = 1e-7;

// Angle in degrees between the orthographic projections of the two axes
// onto the image plane perpendicular to the line of sight. Throws
// DegenerateViewpointError if an axis lies within `eps_deg` of the line of
// sight.
double observed_angle(const StandardPairConfig& config, const Viewpoint& view,
                      double eps_deg = kDegenerateToleranceDeg);
double observed_angle(const StandardPairConfig& config, Vec3 line_of_sight,
                      double eps_deg = kDegenerateToleranceDeg);

struct SphereCell {
    Viewpoint center;
    Vec3 direction;
    double weight = 0.0;  // cos(elevation) * d_elevation * d_azimuth
};

// Latitude-band quadrature grid over the viewing sphere. `resolution` is
// the number of bands per hemisphere; each band is split into a multiple
// of four azimuth cells sized for near-equal area.
struct SphereGrid {
    int resolution = 0;
    std::vector<SphereCell> cells;

    double total_weight() const;
};

inline constexpr int kDefaultResolution = 512;  // 1024 latitude bands
inline constexpr std::size_t kDefaultBins = 36;

SphereGrid sphere_grid(int resolution = kDefaultResolution);

// Viewpoint distribution F over the sphere: uniform, or uniform within an
// elevation band [lo, hi] (degrees) and zero elsewhere.
class ViewpointPrior {
public:
    enum class Kind { uniform, elevation_band };

    static ViewpointPrior uniform();
    static ViewpointPrior elevation_band(double lo_deg, double hi_deg);
    // "uniform" or "band:LO,HI".
    static ViewpointPrior parse(std::string_view descriptor);

    Kind kind() const { return kind_; }
    double band_lo_deg() const { return lo_deg_; }
    double band_hi_deg() const { return hi_deg_; }
    std::string descriptor() const;

    // Unnormalized density at a viewpoint (1 inside the support).
    double density(const Viewpoint& view) const;
    // F(cell) * weight(cell), normalized to sum 1 over the grid.
    std::vector<double> cell_mass(const SphereGrid& grid) const;

private:
    Kind kind_ = Kind::uniform;
    double lo_deg_ = -90.0;
    double hi_deg_ = 90.0;
};

// Bin index of an observed angle among `bins` equal bins over [0, 180].
// Bins are (lo, hi]; 0 falls in the first bin, so a boundary angle goes
// to the lower bin.
std::size_t angle_bin(double angle_deg, std::size_t bins);

struct IntervalProbability {
    double probability = 0.0;
    // Prior mass of cells skipped as degenerate viewpoints.
    double degenerate_mass = 0.0;
};

// Prior mass of viewpoints whose observed angle lies in (lo, hi]
// (with 0 included when lo == 0).
IntervalProbability angle_interval_probability(const StandardPairConfig& config, double lo_deg,
                                               double hi_deg, const ViewpointPrior& prior,
                                               const SphereGrid& grid);

struct AngleLikelihoodTable {
    double true_angle = 0.0;
    std::vector<double> probabilities;
    double degenerate_mass = 0.0;

    std::size_t bins() const { return probabilities.size(); }
    double bin_lo(std::size_t i) const { return 180.0 * static_cast<double>(i) / static_cast<double>(bins()); }
    double bin_hi(std::size_t i) const { return 180.0 * static_cast<double>(i + 1) / static_cast<double>(bins()); }
    // Probability of the bin containing `observed_deg`.
    double probability_of(double observed_deg) const;
};

// p(observed-angle bin | true angle), normalized over non-degenerate mass.
AngleLikelihoodTable angle_likelihood_table(const StandardPairConfig& config, std::size_t bins,
                                            const ViewpointPrior& prior, const SphereGrid& grid);

// True angles sampled at <= 1 degree spacing across theta +/- tol, folded
// into (0, 180]. Zero (coincident axes) is dropped.
std::vector<double> tolerance_samples(double theta_deg, double tol_deg);

// Equal-weight mixture of tables.
AngleLikelihoodTable mix_tables(std::span<const AngleLikelihoodTable> tables, double true_angle);

struct ObservedPairAngle {
    std::size_t first = 0;   // member instance index
    std::size_t second = 0;
    double angle_deg = 0.0;
};

// Product over observed pairs of the bin probability from that pair's
// table. `tables` is aligned with joint.pair_angles. Throws ValidationError
// for a pair the joint does not model.
double joint_angle_likelihood(std::span<const ObservedPairAngle> observed, const JointClass& joint,
                              std::span<const AngleLikelihoodTable> tables);

// Maximum-ignorance likelihood for the "other" joint: (1 / bins) per pair.
double other_angle_likelihood(std::size_t observed_pairs, std::size_t bins);

// Fraction of the (uniform) viewing sphere from which a unit vector's
// projected length is at least (1 - t).
double projected_length_fraction(double t, const SphereGrid& grid);

// |proj(a)| / |proj(b)| for colinear a, b seen along `line_of_sight`.
double colinear_ratio_check(Vec3 a, Vec3 b, Vec3 line_of_sight,
                            double eps_deg = kDegenerateToleranceDeg);

}  // namespace partbelief
