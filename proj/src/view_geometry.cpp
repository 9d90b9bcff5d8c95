#include "partbelief/view_geometry.hpp"

#include "partbelief/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace partbelief {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

// Projection of a unit vector onto the plane perpendicular to unit `sight`.
Vec3 project(Vec3 v, Vec3 sight) { return v - dot(v, sight) * sight; }

Vec3 unit(Vec3 v) {
    const double n = norm(v);
    if (!(n > 0.0)) throw ValidationError("line of sight must be a nonzero vector");
    return (1.0 / n) * v;
}

double parse_number(std::string_view text, std::string_view what) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw ValidationError("bad number '" + std::string(text) + "' in " + std::string(what));
    return value;
}

}  // namespace

double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

double cos_deg(double deg) {
    const double r = std::fmod(deg, 360.0);
    const double m = r < 0.0 ? r + 360.0 : r;
    if (m == 0.0) return 1.0;
    if (m == 90.0 || m == 270.0) return 0.0;
    if (m == 180.0) return -1.0;
    return std::cos(m * kDegToRad);
}

double sin_deg(double deg) {
    const double r = std::fmod(deg, 360.0);
    const double m = r < 0.0 ? r + 360.0 : r;
    if (m == 0.0 || m == 180.0) return 0.0;
    if (m == 90.0) return 1.0;
    if (m == 270.0) return -1.0;
    return std::sin(m * kDegToRad);
}

double StandardPairConfig::actual_angle() const {
    double d = std::fmod(std::abs(alpha2_deg - alpha1_deg), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

Vec3 StandardPairConfig::axis1() const { return {cos_deg(alpha1_deg), sin_deg(alpha1_deg), 0.0}; }
Vec3 StandardPairConfig::axis2() const { return {cos_deg(alpha2_deg), sin_deg(alpha2_deg), 0.0}; }

Vec3 Viewpoint::direction() const {
    const double c = std::cos(elevation);
    return {c * std::cos(azimuth), c * std::sin(azimuth), std::sin(elevation)};
}

double observed_angle(const StandardPairConfig& config, const Viewpoint& view, double eps_deg) {
    return observed_angle(config, view.direction(), eps_deg);
}

namespace {

// Observed angle (degrees) of unit axes a1, a2 along unit `sight`; NaN when
// an axis projects shorter than `min_len`. For a unit axis the projected
// length is sin(angle to the line of sight).
double projected_angle(Vec3 a1, Vec3 a2, Vec3 sight, double min_len) {
    const Vec3 p1 = project(a1, sight);
    const Vec3 p2 = project(a2, sight);
    if (norm(p1) <= min_len || norm(p2) <= min_len) return std::numeric_limits<double>::quiet_NaN();
    return std::atan2(norm(cross(p1, p2)), dot(p1, p2)) / kDegToRad;
}

}  // namespace

double observed_angle(const StandardPairConfig& config, Vec3 line_of_sight, double eps_deg) {
    const double angle = projected_angle(config.axis1(), config.axis2(), unit(line_of_sight),
                                         std::sin(eps_deg * kDegToRad));
    if (std::isnan(angle)) throw DegenerateViewpointError("axis parallel to the line of sight");
    return angle;
}

double SphereGrid::total_weight() const {
    double sum = 0.0;
    for (const auto& c : cells) sum += c.weight;
    return sum;
}

SphereGrid sphere_grid(int resolution) {
    if (resolution < 4) throw ValidationError("sphere grid resolution must be >= 4");
    SphereGrid grid;
    grid.resolution = resolution;
    const int bands = 2 * resolution;
    const double d_elev = kPi / bands;
    for (int k = 0; k < bands; ++k) {
        const double elev = -kPi / 2 + (k + 0.5) * d_elev;
        const double c = std::cos(elev);
        // Azimuth width ~ d_elev / cos(elev); a multiple of four keeps every
        // cell center off the coordinate half-planes.
        const int n_az = std::max(4, 4 * static_cast<int>(std::lround(2.0 * bands * c / 4.0)));
        const double d_az = 2 * kPi / n_az;
        for (int j = 0; j < n_az; ++j) {
            SphereCell cell;
            cell.center = {elev, (j + 0.5) * d_az};
            cell.direction = cell.center.direction();
            cell.weight = c * d_elev * d_az;
            grid.cells.push_back(cell);
        }
    }
    return grid;
}

ViewpointPrior ViewpointPrior::uniform() { return ViewpointPrior{}; }

ViewpointPrior ViewpointPrior::elevation_band(double lo_deg, double hi_deg) {
    if (!(lo_deg >= -90.0 && hi_deg <= 90.0 && lo_deg < hi_deg))
        throw ValidationError("elevation band needs -90 <= lo < hi <= 90");
    ViewpointPrior p;
    p.kind_ = Kind::elevation_band;
    p.lo_deg_ = lo_deg;
    p.hi_deg_ = hi_deg;
    return p;
}

ViewpointPrior ViewpointPrior::parse(std::string_view descriptor) {
    if (descriptor == "uniform") return uniform();
    constexpr std::string_view band = "band:";
    if (descriptor.substr(0, band.size()) == band) {
        const auto rest = descriptor.substr(band.size());
        const auto comma = rest.find(',');
        if (comma == std::string_view::npos)
            throw ValidationError("prior 'band:LO,HI' needs two numbers");
        return elevation_band(parse_number(rest.substr(0, comma), "prior"),
                              parse_number(rest.substr(comma + 1), "prior"));
    }
    throw ValidationError("unknown prior '" + std::string(descriptor) + "'");
}

std::string ViewpointPrior::descriptor() const {
    if (kind_ == Kind::uniform) return "uniform";
    std::ostringstream out;
    out << "band:" << lo_deg_ << ',' << hi_deg_;
    return out.str();
}

double ViewpointPrior::density(const Viewpoint& view) const {
    if (kind_ == Kind::uniform) return 1.0;
    const double e = view.elevation / kDegToRad;
    return (e >= lo_deg_ && e <= hi_deg_) ? 1.0 : 0.0;
}

std::vector<double> ViewpointPrior::cell_mass(const SphereGrid& grid) const {
    std::vector<double> mass(grid.cells.size());
    double total = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        mass[i] = density(grid.cells[i].center) * grid.cells[i].weight;
        total += mass[i];
    }
    if (!(total > 0.0))
        throw ValidationError("viewpoint prior '" + descriptor() + "' has no mass on this grid");
    for (double& m : mass) m /= total;
    return mass;
}

std::size_t angle_bin(double angle_deg, std::size_t bins) {
    if (bins == 0) throw ValidationError("bin count must be positive");
    if (!(angle_deg >= 0.0 && angle_deg <= 180.0))
        throw ValidationError("angle must lie in [0, 180]");
    const double upper = std::ceil(angle_deg * static_cast<double>(bins) / 180.0);
    if (upper < 1.0) return 0;
    return std::min(bins - 1, static_cast<std::size_t>(upper) - 1);
}

IntervalProbability angle_interval_probability(const StandardPairConfig& config, double lo_deg,
                                               double hi_deg, const ViewpointPrior& prior,
                                               const SphereGrid& grid) {
    if (!(lo_deg >= 0.0 && hi_deg <= 180.0)) throw ValidationError("interval must lie in [0, 180]");
    if (lo_deg > hi_deg) throw ValidationError("inverted angle interval");
    const auto mass = prior.cell_mass(grid);
    const Vec3 a1 = config.axis1();
    const Vec3 a2 = config.axis2();
    const double min_len = std::sin(kDegenerateToleranceDeg * kDegToRad);
    IntervalProbability out;
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        if (mass[i] == 0.0) continue;
        const double angle = projected_angle(a1, a2, grid.cells[i].direction, min_len);
        if (std::isnan(angle)) {
            out.degenerate_mass += mass[i];
            continue;
        }
        const bool inside = (angle > lo_deg || (lo_deg == 0.0 && angle == 0.0)) && angle <= hi_deg;
        if (inside) out.probability += mass[i];
    }
    return out;
}

double AngleLikelihoodTable::probability_of(double observed_deg) const {
    return probabilities[angle_bin(observed_deg, bins())];
}

AngleLikelihoodTable angle_likelihood_table(const StandardPairConfig& config, std::size_t bins,
                                            const ViewpointPrior& prior, const SphereGrid& grid) {
    if (bins < 2) throw ValidationError("angle table needs at least 2 bins");
    const auto mass = prior.cell_mass(grid);
    AngleLikelihoodTable table;
    table.true_angle = config.actual_angle();
    table.probabilities.assign(bins, 0.0);
    const Vec3 a1 = config.axis1();
    const Vec3 a2 = config.axis2();
    const double min_len = std::sin(kDegenerateToleranceDeg * kDegToRad);
    // Fixed cell order keeps the sums bit-reproducible.
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        if (mass[i] == 0.0) continue;
        const double angle = projected_angle(a1, a2, grid.cells[i].direction, min_len);
        if (std::isnan(angle))
            table.degenerate_mass += mass[i];
        else
            table.probabilities[angle_bin(angle, bins)] += mass[i];
    }
    double total = 0.0;
    for (double p : table.probabilities) total += p;
    if (!(total > 0.0)) throw ValidationError("every viewpoint of the prior is degenerate");
    for (double& p : table.probabilities) p /= total;
    return table;
}

std::vector<double> tolerance_samples(double theta_deg, double tol_deg) {
    std::vector<double> out;
    const int steps = std::max(1, static_cast<int>(std::ceil(tol_deg)));
    const double step = tol_deg / steps;
    for (int k = -steps; k <= steps; ++k) {
        double a = theta_deg + k * step;
        if (a < 0.0) a = -a;
        if (a > 180.0) a = 360.0 - a;
        if (a > 0.0 && a <= 180.0) out.push_back(a);
    }
    return out;
}

AngleLikelihoodTable mix_tables(std::span<const AngleLikelihoodTable> tables, double true_angle) {
    if (tables.empty()) throw ValidationError("no tables to mix");
    AngleLikelihoodTable out;
    out.true_angle = true_angle;
    out.probabilities.assign(tables.front().bins(), 0.0);
    for (const auto& t : tables) {
        if (t.bins() != out.bins()) throw ValidationError("mixed tables differ in bin count");
        for (std::size_t b = 0; b < t.bins(); ++b) out.probabilities[b] += t.probabilities[b];
        out.degenerate_mass += t.degenerate_mass;
    }
    const double n = static_cast<double>(tables.size());
    for (double& p : out.probabilities) p /= n;
    out.degenerate_mass /= n;
    return out;
}

double joint_angle_likelihood(std::span<const ObservedPairAngle> observed, const JointClass& joint,
                              std::span<const AngleLikelihoodTable> tables) {
    if (tables.size() != joint.pair_angles.size())
        throw ValidationError("joint '" + joint.name + "': need one angle table per modeled pair");
    double likelihood = 1.0;
    for (const auto& o : observed) {
        const PairAngle* pair = joint.find_pair(o.first, o.second);
        if (!pair)
            throw ValidationError("joint '" + joint.name + "' does not model members " +
                                  std::to_string(o.first) + "," + std::to_string(o.second));
        const auto idx = static_cast<std::size_t>(pair - joint.pair_angles.data());
        likelihood *= tables[idx].probability_of(o.angle_deg);
    }
    return likelihood;
}

double other_angle_likelihood(std::size_t observed_pairs, std::size_t bins) {
    return std::pow(1.0 / static_cast<double>(bins), static_cast<double>(observed_pairs));
}

double projected_length_fraction(double t, const SphereGrid& grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("length tolerance must lie in [0, 1]");
    if (t == 0.0) return 0.0;  // exact length only on a great circle: measure zero
    const Vec3 axis{1.0, 0.0, 0.0};
    const auto mass = ViewpointPrior::uniform().cell_mass(grid);
    double inside = 0.0;
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        const double c = dot(axis, grid.cells[i].direction);
        const double projected = std::sqrt(std::max(0.0, 1.0 - c * c));
        if (projected >= 1.0 - t) inside += mass[i];
    }
    return inside;
}

double colinear_ratio_check(Vec3 a, Vec3 b, Vec3 line_of_sight, double eps_deg) {
    const double na = norm(a);
    const double nb = norm(b);
    if (!(na > 0.0 && nb > 0.0)) throw ValidationError("colinear check needs nonzero vectors");
    if (norm(cross(a, b)) > 1e-12 * na * nb) throw ValidationError("vectors are not colinear");
    const Vec3 sight = unit(line_of_sight);
    const Vec3 pa = project(a, sight);
    const Vec3 pb = project(b, sight);
    const double min_len = std::sin(eps_deg * kDegToRad);
    if (norm(pa) <= min_len * na || norm(pb) <= min_len * nb)
        throw DegenerateViewpointError("vectors parallel to the line of sight");
    return norm(pa) / norm(pb);
}

}  // namespace partbelief
