#ifndef FORCH_GRID_HPP
#define FORCH_GRID_HPP

#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "forch/errors.hpp"

namespace forch {

/// Uniform cell-centered grid on an interval (dim 1) or rectangle (dim 2).
class Grid {
public:
    static Grid interval(double length, int cells) { return Grid(1, length, 1.0, cells, 1); }
    static Grid rectangle(double lx, double ly, int nx, int ny) { return Grid(2, lx, ly, nx, ny); }

    int dim() const { return dim_; }
    double lx() const { return lx_; }
    double ly() const { return ly_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }

    int cell_count() const { return nx_ * ny_; }
    double cell_volume() const { return dim_ == 1 ? hx_ : hx_ * hy_; }
    double domain_measure() const { return dim_ == 1 ? lx_ : lx_ * ly_; }
    double boundary_measure() const { return dim_ == 1 ? 2.0 : 2.0 * (lx_ + ly_); }

    int index(int i, int j = 0) const { return j * nx_ + i; }
    double center_x(int i) const { return (i + 0.5) * hx_; }
    double center_y(int j) const { return (j + 0.5) * hy_; }

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && lx_ == o.lx_ && ly_ == o.ly_ && nx_ == o.nx_ && ny_ == o.ny_;
    }

private:
    Grid(int dim, double lx, double ly, int nx, int ny)
        : dim_(dim), lx_(lx), ly_(ly), nx_(nx), ny_(ny) {
        if (dim_ != 1 && dim_ != 2) throw parameter_error("Grid: dim must be 1 or 2");
        if (!(lx_ > 0.0) || (dim_ == 2 && !(ly_ > 0.0)))
            throw parameter_error("Grid: lengths must be positive");
        if (nx_ < 2 || (dim_ == 2 && ny_ < 2))
            throw parameter_error("Grid: need at least 2 cells per axis");
        if (dim_ == 1) { ly_ = 1.0; ny_ = 1; }
        hx_ = lx_ / nx_;
        hy_ = dim_ == 2 ? ly_ / ny_ : 1.0;
    }

    int dim_;
    double lx_, ly_;
    int nx_, ny_;
    double hx_ = 0.0, hy_ = 0.0;
};

/// Cell-centered values on a shared grid, stamped with a time.
class DiscreteField {
public:
    DiscreteField(std::shared_ptr<const Grid> grid, double time = 0.0)
        : grid_(std::move(grid)), time_(time), values_(grid_->cell_count(), 0.0) {}

    DiscreteField(std::shared_ptr<const Grid> grid, std::vector<double> values, double time = 0.0)
        : grid_(std::move(grid)), time_(time), values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != grid_->cell_count())
            throw parameter_error("DiscreteField: value count must equal cell count");
    }

    const Grid& grid() const { return *grid_; }
    std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    double& operator[](int c) { return values_[c]; }
    double operator[](int c) const { return values_[c]; }
    double at(int i, int j = 0) const { return values_[grid_->index(i, j)]; }
    double& at(int i, int j = 0) { return values_[grid_->index(i, j)]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool nonnegative() const {
        for (double v : values_)
            if (v < 0.0) return false;
        return true;
    }

    double min_value() const {
        double m = values_[0];
        for (double v : values_) m = std::min(m, v);
        return m;
    }
    double max_value() const {
        double m = values_[0];
        for (double v : values_) m = std::max(m, v);
        return m;
    }

    /// Fills from f(x) in 1D or f(x,y) in 2D at cell centers.
    static DiscreteField sample(std::shared_ptr<const Grid> grid,
                                const std::function<double(double, double)>& f,
                                double time = 0.0) {
        DiscreteField out(grid, time);
        const Grid& g = out.grid();
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i)
                out.at(i, j) = f(g.center_x(i), g.dim() == 2 ? g.center_y(j) : 0.0);
        return out;
    }

private:
    std::shared_ptr<const Grid> grid_;
    double time_;
    std::vector<double> values_;
};

/// Time-ordered snapshots of one evolving field.
class SpaceTimeTrace {
public:
    void push(DiscreteField field) {
        if (!snaps_.empty() && !(field.time() > snaps_.back().time()))
            throw parameter_error("SpaceTimeTrace: times must be strictly increasing");
        snaps_.push_back(std::move(field));
    }

    std::size_t size() const { return snaps_.size(); }
    bool empty() const { return snaps_.empty(); }
    const DiscreteField& operator[](std::size_t k) const { return snaps_[k]; }
    const DiscreteField& front() const { return snaps_.front(); }
    const DiscreteField& back() const { return snaps_.back(); }
    double t_begin() const { return snaps_.front().time(); }
    double t_end() const { return snaps_.back().time(); }

    /// Trapezoid rule for int_{t0}^{tend} F(u(t)) dt over the snapshots.
    double time_integral(const std::function<double(const DiscreteField&)>& F) const {
        require_time_span();
        double acc = 0.0;
        double prev = F(snaps_[0]);
        for (std::size_t k = 1; k < snaps_.size(); ++k) {
            const double cur = F(snaps_[k]);
            acc += 0.5 * (prev + cur) * (snaps_[k].time() - snaps_[k - 1].time());
            prev = cur;
        }
        return acc;
    }

    double sup_over_time(const std::function<double(const DiscreteField&)>& F) const {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& s : snaps_) m = std::max(m, F(s));
        return m;
    }

    void require_time_span() const {
        if (snaps_.size() < 2)
            throw parameter_error("SpaceTimeTrace: time integrals need at least 2 snapshots");
    }

private:
    std::vector<DiscreteField> snaps_;
};

} // namespace forch

#endif
