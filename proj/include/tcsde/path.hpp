#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tcsde {

enum class Interp { CadlagStep, Linear };

std::string to_string(Interp i);
Interp interp_from_string(const std::string& s);

// Points i*step for i = 0..round(horizon/step).
std::vector<double> uniform_grid(double step, double horizon);

// Sorted union of two strictly increasing grids (exact duplicates merged).
std::vector<double> union_grid(std::span<const double> a, std::span<const double> b);

// Index of the last grid point <= t (0 if t < grid[0]).
std::size_t left_index(std::span<const double> grid, double t);

struct Jump {
    std::size_t index;
    double left_limit;
};

// Grid-sampled real path with optional explicit jump records. A record at index i
// means the path approaches left_limit just before grid[i] and jumps to values[i].
// Without a record the discrete left limit at i is values[i-1].
class CadlagPath {
  public:
    CadlagPath() = default;
    CadlagPath(std::vector<double> grid, std::vector<double> values, Interp interp = Interp::Linear,
               std::vector<Jump> jumps = {});

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<Jump>& jumps() const { return jumps_; }
    Interp interp() const { return interp_; }
    std::size_t size() const { return grid_.size(); }
    double horizon() const { return grid_.back(); }
    double operator[](std::size_t i) const { return values_[i]; }

    // Value at t under the path's interpolation.
    double at(double t) const;
    // Value at the last grid point <= t; the non-anticipating evaluation used for integrands.
    double left_value(double t) const;
    double left_limit(std::size_t i) const;
    // Size of the recorded jump at i, or 0.
    double jump(std::size_t i) const;
    const Jump* find_jump(std::size_t i) const;

    CadlagPath refined(std::span<const double> grid) const;

  private:
    std::vector<double> grid_;
    std::vector<double> values_;
    Interp interp_ = Interp::Linear;
    std::vector<Jump> jumps_;
};

// Nondecreasing grid-sampled path (a subordinator D or a time change E).
// values[0] >= 0; inverses of paths that start flat can start above 0.
class MonotonePath {
  public:
    MonotonePath() = default;
    MonotonePath(std::vector<double> grid, std::vector<double> values, Interp interp);

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    Interp interp() const { return interp_; }
    std::size_t size() const { return grid_.size(); }
    double horizon() const { return grid_.back(); }
    double sup_value() const { return values_.back(); }
    double operator[](std::size_t i) const { return values_[i]; }

    double at(double t) const;
    bool strictly_increasing() const;
    CadlagPath as_cadlag() const;

  private:
    std::vector<double> grid_;
    std::vector<double> values_;
    Interp interp_ = Interp::Linear;
};

// Every k-th grid point starting at 0 (the grid must have (size-1) divisible by k).
// A D sampled this way is the subordinator on the coarser grid, same path.
CadlagPath subsample(const CadlagPath& p, std::size_t k);
MonotonePath subsample(const MonotonePath& p, std::size_t k);

}  // namespace tcsde
