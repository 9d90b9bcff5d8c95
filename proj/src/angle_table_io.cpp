#include "partbelief/angle_table_io.hpp"

#include "partbelief/error.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace partbelief {

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string header_value(const std::string& header, const std::string& key) {
    const std::string needle = key + "=";
    const auto at = header.find(needle);
    if (at == std::string::npos) throw ParseError("angle table header lacks '" + key + "'");
    const auto start = at + needle.size();
    const auto end = header.find('\t', start);
    return header.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

}  // namespace

void write_angle_table_tsv(std::ostream& out, const AngleLikelihoodTable& table, int resolution,
                           const std::string& prior) {
    out << "# true_angle=" << fixed(table.true_angle, 6) << "\tbins=" << table.bins()
        << "\tresolution=" << resolution << "\tprior=" << prior << '\n';
    out << "bin_lo_deg\tbin_hi_deg\tprobability\n";
    for (std::size_t b = 0; b < table.bins(); ++b)
        out << fixed(table.bin_lo(b), 6) << '\t' << fixed(table.bin_hi(b), 6) << '\t'
            << fixed(table.probabilities[b], 9) << '\n';
}

AngleTableFile read_angle_table_tsv(std::istream& in) {
    std::string header;
    std::string columns;
    if (!std::getline(in, header) || header.rfind("# ", 0) != 0)
        throw ParseError("angle table: missing '# true_angle=...' header");
    if (!std::getline(in, columns) || columns != "bin_lo_deg\tbin_hi_deg\tprobability")
        throw ParseError("angle table: missing column header");

    AngleTableFile file;
    std::size_t bins = 0;
    try {
        file.table.true_angle = std::stod(header_value(header, "true_angle"));
        bins = std::stoul(header_value(header, "bins"));
        file.resolution = std::stoi(header_value(header, "resolution"));
    } catch (const std::logic_error&) {
        throw ParseError("angle table: malformed header values");
    }
    file.prior = header_value(header, "prior");

    std::string line;
    double total = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double lo = 0.0, hi = 0.0, p = 0.0;
        if (!(row >> lo >> hi >> p) || p < 0.0) throw ParseError("angle table: bad row '" + line + "'");
        file.table.probabilities.push_back(p);
        total += p;
    }
    if (file.table.probabilities.size() != bins || bins < 2)
        throw ParseError("angle table: row count does not match bins");
    if (!(total > 0.0)) throw ParseError("angle table: probabilities sum to zero");
    for (double& p : file.table.probabilities) p /= total;
    return file;
}

AngleTableSource::AngleTableSource(std::size_t bins, ViewpointPrior prior, int resolution,
                                   std::optional<std::filesystem::path> cache_dir)
    : bins_(bins), prior_(std::move(prior)), resolution_(resolution), cache_dir_(std::move(cache_dir)) {
    if (bins_ < 2) throw ValidationError("angle table needs at least 2 bins");
    if (resolution_ < 4) throw ValidationError("sphere grid resolution must be >= 4");
}

const SphereGrid& AngleTableSource::grid() {
    if (!grid_) grid_ = sphere_grid(resolution_);
    return *grid_;
}

std::filesystem::path AngleTableSource::cache_path(double true_angle) const {
    std::string prior = prior_.descriptor();
    for (char& c : prior)
        if (c == ':' || c == ',') c = '_';
    const std::string name = "angle_" + fixed(true_angle, 6) + "_B" + std::to_string(bins_) + "_R" +
                             std::to_string(resolution_) + "_" + prior + ".tsv";
    return cache_dir_.value_or(".") / name;
}

const AngleLikelihoodTable& AngleTableSource::exact(double true_angle) {
    if (auto it = memo_.find(true_angle); it != memo_.end()) return it->second;

    if (cache_dir_) {
        std::ifstream in(cache_path(true_angle));
        if (in) {
            AngleTableFile file = read_angle_table_tsv(in);
            if (file.resolution == resolution_ && file.prior == prior_.descriptor() &&
                file.table.bins() == bins_)
                return memo_.emplace(true_angle, std::move(file.table)).first->second;
        }
    }
    AngleLikelihoodTable table =
        angle_likelihood_table(StandardPairConfig::from_actual(true_angle), bins_, prior_, grid());
    if (cache_dir_) {
        std::filesystem::create_directories(*cache_dir_);
        std::ofstream out(cache_path(true_angle), std::ios::binary);
        write_angle_table_tsv(out, table, resolution_, prior_.descriptor());
    }
    return memo_.emplace(true_angle, std::move(table)).first->second;
}

AngleLikelihoodTable AngleTableSource::toleranced(double theta_deg, double tol_deg) {
    std::vector<AngleLikelihoodTable> parts;
    for (double a : tolerance_samples(theta_deg, tol_deg)) parts.push_back(exact(a));
    return mix_tables(parts, theta_deg);
}

}  // namespace partbelief
