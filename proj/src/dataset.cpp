#include "nasreg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace nasreg {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
    const std::string cell = trim(raw);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value))
        throw DataError("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                        ", column " + std::to_string(col + 1));
    return value;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& target_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = trim(h);
    if (header.size() < 2) throw DataError("need at least 2 columns, got " + std::to_string(header.size()));

    std::set<std::string> seen;
    for (const auto& h : header)
        if (!seen.insert(h).second) throw DataError("duplicate header name '" + h + "'");

    std::size_t target_idx = header.size() - 1;
    if (target_column) {
        const auto it = std::find(header.begin(), header.end(), *target_column);
        if (it == header.end()) throw DataError("unknown target column '" + *target_column + "'");
        target_idx = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;  // header is row 1
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
        std::vector<double> parsed(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) parsed[c] = parse_cell(cells[c], row_no, c);
        rows.push_back(std::move(parsed));
    }
    if (rows.size() < 2) throw DataError("need at least 2 data rows, got " + std::to_string(rows.size()));

    Dataset d;
    d.target_name = header[target_idx];
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != target_idx) d.feature_names.push_back(header[c]);
    d.features = Matrix(rows.size(), header.size() - 1);
    d.targets.resize(rows.size());
    d.synthetic_flags.assign(rows.size(), false);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t fc = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == target_idx)
                d.targets[r] = rows[r][c];
            else
                d.features(r, fc++) = rows[r][c];
        }
    }
    return d;
}

void write_csv(const Dataset& d, const std::filesystem::path& path, bool synthetic_column) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path.string());
    out.precision(17);
    for (const auto& name : d.feature_names) out << name << ',';
    out << d.target_name;
    if (synthetic_column) out << ",synthetic";
    out << '\n';
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        for (std::size_t c = 0; c < d.n_features(); ++c) out << d.features(r, c) << ',';
        out << d.targets[r];
        if (synthetic_column) out << ',' << (d.synthetic_flags[r] ? 1 : 0);
        out << '\n';
    }
}

NormStats fit_normalizer(const Dataset& d) {
    if (d.n_rows() == 0) throw DataError("fit_normalizer: empty dataset");
    const std::size_t cols = d.n_features() + 1;
    NormStats s;
    s.means.assign(cols, 0.0);
    s.stds.assign(cols, 0.0);
    const double n = static_cast<double>(d.n_rows());
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        for (std::size_t c = 0; c < d.n_features(); ++c) s.means[c] += d.features(r, c);
        s.means.back() += d.targets[r];
    }
    for (auto& m : s.means) m /= n;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        for (std::size_t c = 0; c < d.n_features(); ++c) {
            const double dd = d.features(r, c) - s.means[c];
            s.stds[c] += dd * dd;
        }
        const double dt = d.targets[r] - s.means.back();
        s.stds.back() += dt * dt;
    }
    for (auto& v : s.stds) v = std::sqrt(v / n);
    return s;
}

Dataset apply_normalizer(const Dataset& d, const NormStats& s, bool invert) {
    if (s.means.size() != d.n_features() + 1)
        throw DataError("apply_normalizer: stats cover " + std::to_string(s.means.size()) +
                        " columns, dataset has " + std::to_string(d.n_features() + 1));
    Dataset out = d;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        for (std::size_t c = 0; c < d.n_features(); ++c) {
            const double x = d.features(r, c);
            out.features(r, c) = invert ? x * s.stds[c] + s.means[c]
                                        : (s.stds[c] == 0.0 ? 0.0 : (x - s.means[c]) / s.stds[c]);
        }
        const double y = d.targets[r];
        out.targets[r] = invert ? y * s.target_std() + s.target_mean()
                                : (s.target_std() == 0.0 ? 0.0 : (y - s.target_mean()) / s.target_std());
    }
    return out;
}

Dataset take_rows(const Dataset& d, std::span<const std::size_t> indices) {
    Dataset out;
    out.feature_names = d.feature_names;
    out.target_name = d.target_name;
    out.features = Matrix(indices.size(), d.n_features());
    out.targets.resize(indices.size());
    out.synthetic_flags.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t r = indices[i];
        for (std::size_t c = 0; c < d.n_features(); ++c) out.features(i, c) = d.features(r, c);
        out.targets[i] = d.targets[r];
        out.synthetic_flags[i] = d.synthetic_flags[r];
    }
    return out;
}

SplitResult split(const Dataset& d, double train_frac, double val_frac, Rng& rng) {
    if (train_frac <= 0.0 || val_frac <= 0.0 || train_frac + val_frac >= 1.0)
        throw DataError("split: fractions must be positive with train+val < 1");
    const std::size_t n = d.n_rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(std::span<std::size_t>(order), rng);

    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_frac));
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * val_frac));
    const std::size_t n_test = n - n_train - n_val;
    if (n_train == 0 || n_val == 0 || n_test == 0)
        throw DataError("split: a partition is empty (n=" + std::to_string(n) + ")");

    SplitResult out;
    out.train = take_rows(d, std::span(order).subspan(0, n_train));
    out.val = take_rows(d, std::span(order).subspan(n_train, n_val));
    out.test = take_rows(d, std::span(order).subspan(n_train + n_val, n_test));
    return out;
}

std::size_t poly_augment_size(std::size_t n_features, int order) {
    // C(n + p, p)
    std::size_t num = 1, den = 1;
    for (int i = 1; i <= order; ++i) {
        num *= n_features + static_cast<std::size_t>(i);
        den *= static_cast<std::size_t>(i);
    }
    return num / den;
}

namespace {

// Visits nondecreasing index tuples of exactly `degree` factors;
// lexicographic tuple order gives the graded-lex monomial order.
template <typename Emit>
void enumerate_monomials(std::size_t n, int degree, std::size_t first, std::vector<std::size_t>& idx,
                         Emit&& emit) {
    if (degree == 0) {
        emit(idx);
        return;
    }
    for (std::size_t v = first; v < n; ++v) {
        idx.push_back(v);
        enumerate_monomials(n, degree - 1, v, idx, emit);
        idx.pop_back();
    }
}

template <typename Emit>
void for_each_monomial(std::size_t n, int order, Emit&& emit) {
    std::vector<std::size_t> idx;
    for (int degree = 0; degree <= order; ++degree)
        enumerate_monomials(n, degree, 0, idx, emit);
}

}  // namespace

std::vector<double> poly_augment(std::span<const double> x, int order) {
    if (order < 1) throw std::invalid_argument("poly_augment: order must be >= 1");
    std::vector<double> out;
    out.reserve(poly_augment_size(x.size(), order));
    for_each_monomial(x.size(), order, [&](const std::vector<std::size_t>& idx) {
        double v = 1.0;
        for (std::size_t i : idx) v *= x[i];
        out.push_back(v);
    });
    return out;
}

std::vector<std::string> poly_feature_names(const std::vector<std::string>& names, int order) {
    if (order < 1) throw std::invalid_argument("poly_feature_names: order must be >= 1");
    std::vector<std::string> out;
    out.reserve(poly_augment_size(names.size(), order));
    for_each_monomial(names.size(), order, [&](const std::vector<std::size_t>& idx) {
        if (idx.empty()) {
            out.emplace_back("1");
            return;
        }
        std::string name = names[idx[0]];
        for (std::size_t i = 1; i < idx.size(); ++i) name += "*" + names[idx[i]];
        out.push_back(std::move(name));
    });
    return out;
}

Dataset poly_augment_dataset(const Dataset& d, int order) {
    Dataset out;
    out.feature_names = poly_feature_names(d.feature_names, order);
    out.target_name = d.target_name;
    out.features = Matrix(d.n_rows(), out.feature_names.size());
    out.targets = d.targets;
    out.synthetic_flags = d.synthetic_flags;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        const auto row = poly_augment(d.features.row(r), order);
        for (std::size_t c = 0; c < row.size(); ++c) out.features(r, c) = row[c];
    }
    return out;
}

MetricsReport compute_metrics(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size())
        throw std::invalid_argument("compute_metrics: length mismatch (" + std::to_string(y.size()) +
                                    " vs " + std::to_string(yhat.size()) + ")");
    if (y.empty()) throw std::invalid_argument("compute_metrics: empty input");

    MetricsReport m;
    m.n = y.size();
    const double n = static_cast<double>(y.size());

    bool zero_target = false;
    double mape = 0.0, sq = 0.0, mean_err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - yhat[i];
        sq += e * e;
        mean_err += e;
        if (y[i] == 0.0)
            zero_target = true;
        else
            mape += std::abs(e / y[i]);
    }
    mean_err /= n;
    m.rmse = std::sqrt(sq / n);
    if (!zero_target) m.mape = mape / n;

    double var = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - yhat[i] - mean_err;
        var += e * e;
    }
    m.std_dev = std::sqrt(var / n);
    return m;
}

}  // namespace nasreg
