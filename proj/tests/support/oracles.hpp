#pragma once

// Reference implementations used only by the tests. Each one is written
// straight from the defining formulas, without sharing code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

inline std::filesystem::path data_file(const std::string& name) {
    return std::filesystem::path(EMDSCALE_TEST_DATA_DIR) / name;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Mean R/S over the floor(N/n) disjoint windows, long double, no shortcuts.
inline long double rescaled_range(std::span<const double> x, std::size_t n) {
    const std::size_t windows = x.size() / n;
    long double total = 0.0L;
    std::size_t used = 0;
    for (std::size_t m = 0; m < windows; ++m) {
        long double mu = 0.0L;
        for (std::size_t q = 0; q < n; ++q) {
            mu += x[m * n + q];
        }
        mu /= static_cast<long double>(n);
        long double var = 0.0L;
        for (std::size_t q = 0; q < n; ++q) {
            const long double d = x[m * n + q] - mu;
            var += d * d;
        }
        const long double s = std::sqrt(var / static_cast<long double>(n));
        if (s == 0.0L) {
            continue;
        }
        // Y_q = sum_{i<=q} (x_i - mu), recomputed from scratch for every q.
        long double ymax = -INFINITY;
        long double ymin = INFINITY;
        for (std::size_t q = 0; q < n; ++q) {
            long double y = 0.0L;
            for (std::size_t i = 0; i <= q; ++i) {
                y += x[m * n + i] - mu;
            }
            ymax = std::max(ymax, y);
            ymin = std::min(ymin, y);
        }
        total += (ymax - ymin) / s;
        ++used;
    }
    if (used == 0) {
        throw std::runtime_error("all windows flat");
    }
    return total / static_cast<long double>(used);
}

struct OlsFit {
    std::vector<long double> coef;
    std::vector<long double> se;
    std::vector<long double> t;
    long double ssr = 0.0L;
};

/// Normal equations (X'X) b = X'y solved by Gauss-Jordan with partial pivoting, in long double.
/// Columns are equilibrated to unit norm first and the scaling undone afterwards.
inline OlsFit ols(const std::vector<std::vector<double>>& rows, std::span<const double> y) {
    const std::size_t nobs = rows.size();
    const std::size_t p = rows.front().size();
    std::vector<long double> scale(p, 0.0L);
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < p; ++j) {
            scale[j] += static_cast<long double>(r[j]) * r[j];
        }
    }
    for (auto& s : scale) {
        s = std::sqrt(s);
    }
    // Augmented [X'X | X'y | I].
    const std::size_t width = 2 * p + 1;
    std::vector<std::vector<long double>> a(p, std::vector<long double>(width, 0.0L));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            long double acc = 0.0L;
            for (std::size_t r = 0; r < nobs; ++r) {
                acc += (rows[r][i] / scale[i]) * (rows[r][j] / scale[j]);
            }
            a[i][j] = acc;
        }
        long double acc = 0.0L;
        for (std::size_t r = 0; r < nobs; ++r) {
            acc += (rows[r][i] / scale[i]) * y[r];
        }
        a[i][p] = acc;
        a[i][p + 1 + i] = 1.0L;
    }
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                pivot = r;
            }
        }
        if (std::abs(a[pivot][col]) < 1e-15L) {
            throw std::runtime_error("singular normal equations");
        }
        std::swap(a[col], a[pivot]);
        const long double d = a[col][col];
        for (auto& v : a[col]) {
            v /= d;
        }
        for (std::size_t r = 0; r < p; ++r) {
            if (r != col && a[r][col] != 0.0L) {
                const long double f = a[r][col];
                for (std::size_t c = 0; c < width; ++c) {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    OlsFit fit;
    fit.coef.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        fit.coef[j] = a[j][p] / scale[j];
    }
    for (std::size_t r = 0; r < nobs; ++r) {
        long double e = y[r];
        for (std::size_t j = 0; j < p; ++j) {
            e -= fit.coef[j] * rows[r][j];
        }
        fit.ssr += e * e;
    }
    const long double sigma2 = fit.ssr / static_cast<long double>(nobs - p);
    fit.se.resize(p);
    fit.t.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        fit.se[j] = std::sqrt(sigma2 * a[j][p + 1 + j]) / scale[j];
        fit.t[j] = fit.coef[j] / fit.se[j];
    }
    return fit;
}

/// Rows of [1, X_{t-1}, t, DU_t, DT_t, dX_{t-1}, ..., dX_{t-k}] and dX_t for t = k+1 .. T-1.
inline std::pair<std::vector<std::vector<double>>, std::vector<double>> break_design(std::span<const double> x,
                                                                                    std::size_t t_b, std::size_t k) {
    std::vector<std::vector<double>> rows;
    std::vector<double> dy;
    for (std::size_t t = k + 1; t < x.size(); ++t) {
        const double td = static_cast<double>(t);
        const bool after = t > t_b;
        std::vector<double> row{1.0, x[t - 1], td, after ? 1.0 : 0.0, after ? td - static_cast<double>(t_b) : 0.0};
        for (std::size_t j = 1; j <= k; ++j) {
            row.push_back(x[t - j] - x[t - j - 1]);
        }
        rows.push_back(std::move(row));
        dy.push_back(x[t] - x[t - 1]);
    }
    return {rows, dy};
}

/// Sign changes, ignoring exact zeros.
inline std::size_t sign_changes(std::span<const double> x) {
    std::size_t count = 0;
    int last = 0;
    for (double v : x) {
        const int s = v > 0.0 ? 1 : v < 0.0 ? -1 : 0;
        if (s != 0) {
            if (last != 0 && s != last) {
                ++count;
            }
            last = s;
        }
    }
    return count;
}

/// Mean period from sign changes: two crossings per cycle.
inline double zero_crossing_period(std::span<const double> x) {
    return 2.0 * static_cast<double>(x.size()) / static_cast<double>(sign_changes(x));
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Interior 90%: [n/20, n - n/20).
inline std::pair<std::size_t, std::size_t> interior(std::size_t n) { return {n / 20, n - n / 20}; }

template <typename A, typename B>
double interior_correlation(const A& a, const B& b) {
    const auto [lo, hi] = interior(a.size());
    return pearson(std::span<const double>(a).subspan(lo, hi - lo), std::span<const double>(b).subspan(lo, hi - lo));
}

inline double rms(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) {
        acc += v * v;
    }
    return std::sqrt(acc / static_cast<double>(x.size()));
}

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sd);
    std::vector<double> out(n);
    for (auto& v : out) {
        v = dist(rng);
    }
    return out;
}

}  // namespace oracle
