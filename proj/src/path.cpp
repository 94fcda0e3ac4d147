#include "tcsde/path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcsde/errors.hpp"

namespace tcsde {

std::string to_string(Interp i) { return i == Interp::CadlagStep ? "step" : "linear"; }

Interp interp_from_string(const std::string& s) {
    if (s == "step") {
        return Interp::CadlagStep;
    }
    if (s == "linear") {
        return Interp::Linear;
    }
    throw ConfigError("unknown interpolation '" + s + "'");
}

std::vector<double> uniform_grid(double step, double horizon) {
    if (!(step > 0.0) || !(horizon >= step)) {
        throw ConfigError("uniform_grid: need 0 < step <= horizon");
    }
    const auto n = static_cast<std::size_t>(std::llround(horizon / step));
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        g[i] = static_cast<double>(i) * step;
    }
    return g;
}

std::vector<double> union_grid(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t left_index(std::span<const double> grid, double t) {
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) {
        return 0;
    }
    return static_cast<std::size_t>(it - grid.begin()) - 1;
}

namespace {

void check_grid(const std::vector<double>& grid, std::size_t n_values, const char* who) {
    if (grid.empty() || grid.size() != n_values) {
        throw GridError(std::string(who) + ": grid and values must be non-empty and of equal length");
    }
    if (grid[0] != 0.0) {
        throw GridError(std::string(who) + ": grid must start at 0");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw GridError(std::string(who) + ": grid must be strictly increasing");
        }
    }
}

// Relative slack for evaluation right at the horizon.
bool beyond(double t, double horizon) { return t > horizon + 1e-12 * std::max(1.0, std::abs(horizon)); }

}  // namespace

CadlagPath::CadlagPath(std::vector<double> grid, std::vector<double> values, Interp interp, std::vector<Jump> jumps)
    : grid_(std::move(grid)), values_(std::move(values)), interp_(interp), jumps_(std::move(jumps)) {
    check_grid(grid_, values_.size(), "CadlagPath");
    std::sort(jumps_.begin(), jumps_.end(), [](const Jump& a, const Jump& b) { return a.index < b.index; });
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        if (jumps_[k].index == 0 || jumps_[k].index >= grid_.size()) {
            throw GridError("CadlagPath: jump index out of range");
        }
        if (k > 0 && jumps_[k].index == jumps_[k - 1].index) {
            throw GridError("CadlagPath: duplicate jump record");
        }
    }
}

const Jump* CadlagPath::find_jump(std::size_t i) const {
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), i, [](const Jump& j, std::size_t v) { return j.index < v; });
    if (it != jumps_.end() && it->index == i) {
        return &*it;
    }
    return nullptr;
}

double CadlagPath::left_limit(std::size_t i) const {
    if (i == 0) {
        return values_[0];
    }
    if (const Jump* j = find_jump(i)) {
        return j->left_limit;
    }
    return values_[i - 1];
}

double CadlagPath::jump(std::size_t i) const {
    const Jump* j = find_jump(i);
    return j ? values_[i] - j->left_limit : 0.0;
}

double CadlagPath::at(double t) const {
    if (t < 0.0 || beyond(t, horizon())) {
        throw HorizonError("CadlagPath: t=" + std::to_string(t) + " outside [0, " + std::to_string(horizon()) + "]");
    }
    const std::size_t i = left_index(grid_, t);
    if (grid_[i] == t || i + 1 == grid_.size() || interp_ == Interp::CadlagStep) {
        return values_[i];
    }
    const double target = jumps_.empty() ? values_[i + 1] : left_limit(i + 1);
    const double w = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return values_[i] + w * (target - values_[i]);
}

double CadlagPath::left_value(double t) const {
    if (t < 0.0 || beyond(t, horizon())) {
        throw HorizonError("CadlagPath: t=" + std::to_string(t) + " outside [0, " + std::to_string(horizon()) + "]");
    }
    return values_[left_index(grid_, t)];
}

CadlagPath CadlagPath::refined(std::span<const double> g) const {
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        v[k] = at(g[k]);
    }
    std::vector<Jump> js;
    for (const Jump& j : jumps_) {
        auto it = std::lower_bound(g.begin(), g.end(), grid_[j.index]);
        if (it == g.end() || *it != grid_[j.index]) {
            throw GridError("CadlagPath::refined: target grid drops a jump time");
        }
        js.push_back({static_cast<std::size_t>(it - g.begin()), j.left_limit});
    }
    return CadlagPath({g.begin(), g.end()}, std::move(v), interp_, std::move(js));
}

MonotonePath::MonotonePath(std::vector<double> grid, std::vector<double> values, Interp interp)
    : grid_(std::move(grid)), values_(std::move(values)), interp_(interp) {
    check_grid(grid_, values_.size(), "MonotonePath");
    if (values_[0] < 0.0) {
        throw GridError("MonotonePath: values must start at a nonnegative level");
    }
    for (std::size_t i = 1; i < values_.size(); ++i) {
        if (values_[i] < values_[i - 1]) {
            throw GridError("MonotonePath: values must be nondecreasing");
        }
    }
}

double MonotonePath::at(double t) const {
    if (t < 0.0 || beyond(t, horizon())) {
        throw HorizonError("MonotonePath: t=" + std::to_string(t) + " outside [0, " + std::to_string(horizon()) + "]");
    }
    const std::size_t i = left_index(grid_, t);
    if (grid_[i] == t || i + 1 == grid_.size() || interp_ == Interp::CadlagStep) {
        return values_[i];
    }
    const double w = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return values_[i] + w * (values_[i + 1] - values_[i]);
}

bool MonotonePath::strictly_increasing() const {
    for (std::size_t i = 1; i < values_.size(); ++i) {
        if (!(values_[i] > values_[i - 1])) {
            return false;
        }
    }
    return true;
}

CadlagPath MonotonePath::as_cadlag() const { return CadlagPath(grid_, values_, interp_); }

namespace {

template <class V>
std::pair<std::vector<double>, std::vector<double>> every_kth(const std::vector<double>& g, const V& v, std::size_t k) {
    if (k == 0 || (g.size() - 1) % k != 0) {
        throw GridError("subsample: grid length minus one must be a multiple of " + std::to_string(k));
    }
    std::vector<double> gg;
    std::vector<double> vv;
    gg.reserve((g.size() - 1) / k + 1);
    vv.reserve(gg.capacity());
    for (std::size_t i = 0; i < g.size(); i += k) {
        gg.push_back(g[i]);
        vv.push_back(v[i]);
    }
    return {std::move(gg), std::move(vv)};
}

}  // namespace

CadlagPath subsample(const CadlagPath& p, std::size_t k) {
    auto [g, v] = every_kth(p.grid(), p.values(), k);
    std::vector<Jump> jumps;
    for (const Jump& j : p.jumps()) {
        // jumps between kept points fold into the coarse increment
        if (j.index % k == 0) {
            jumps.push_back({j.index / k, j.left_limit});
        }
    }
    return CadlagPath(std::move(g), std::move(v), p.interp(), std::move(jumps));
}

MonotonePath subsample(const MonotonePath& p, std::size_t k) {
    auto [g, v] = every_kth(p.grid(), p.values(), k);
    return MonotonePath(std::move(g), std::move(v), p.interp());
}

}  // namespace tcsde
