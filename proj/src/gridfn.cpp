#include "transq/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "transq/csv.hpp"
#include "transq/error.hpp"

namespace transq {

GridSpec::GridSpec(double t_min, double t_max, double dt) : t_min_(t_min), t_max_(t_max), dt_(dt), cells_(0) {
    if (!std::isfinite(t_min) || !std::isfinite(t_max) || !std::isfinite(dt)) throw InputError("grid: non-finite bounds");
    if (!(dt > 0.0)) throw InputError("grid: dt must be positive");
    if (!(t_max > t_min)) throw InputError("grid: t_max must exceed t_min");
    const double ratio = (t_max - t_min) / dt;
    const double r = std::round(ratio);
    if (std::abs(ratio - r) > 1e-7 * std::max(1.0, r))
        throw InputError("grid: (t_max - t_min)/dt must be an integer");
    if (r < 2.0) throw InputError("grid: need at least two cells");
    cells_ = static_cast<std::size_t>(r);
    const double inv = 1.0 / dt;
    const double m0 = t_min * std::round(inv);
    if (std::abs(inv - std::round(inv)) < 1e-9 * inv && std::abs(m0 - std::round(m0)) < 1e-9 * std::max(1.0, std::abs(m0)) &&
        std::abs(m0) < 1e15) {
        steps_per_unit_ = std::round(inv);
        origin_steps_ = std::round(m0);
    }
}

double GridSpec::at(std::size_t k) const {
    if (steps_per_unit_ > 0.0) return (origin_steps_ + static_cast<double>(k)) / steps_per_unit_;
    return t_min_ + static_cast<double>(k) * dt_;
}

std::size_t GridSpec::nearest(double t) const {
    double r = std::round((t - t_min_) / dt_);
    if (r <= 0.0) return 0;
    if (r >= static_cast<double>(cells_)) return cells_;
    return static_cast<std::size_t>(r);
}

std::size_t GridSpec::floor_index(double t) const {
    double r = (t - t_min_) / dt_;
    double f = std::floor(r + 1e-9);
    if (f <= 0.0) return 0;
    if (f >= static_cast<double>(cells_)) return cells_;
    return static_cast<std::size_t>(f);
}

const char* interp_name(Interp i) {
    switch (i) {
        case Interp::linear:
            return "linear";
        case Interp::left_constant:
            return "left-constant";
        case Interp::right_constant:
            return "right-constant";
    }
    return "linear";
}

Interp parse_interp(const std::string& s) {
    if (s == "linear") return Interp::linear;
    if (s == "left-constant") return Interp::left_constant;
    if (s == "right-constant") return Interp::right_constant;
    throw InputError("unknown interp tag: " + s);
}

GridFunction::GridFunction(GridSpec g, std::vector<double> v, Interp i) : grid(g), values(std::move(v)), interp(i) {
    if (values.size() != grid.size()) throw InputError("GridFunction: value count does not match grid");
}

GridFunction::GridFunction(GridSpec g, double fill, Interp i) : grid(g), values(g.size(), fill), interp(i) {}

double GridFunction::operator()(double t) const {
    const double r = (t - grid.t_min()) / grid.dt();
    if (r <= 0.0) return values.front();
    const double n = static_cast<double>(grid.cells());
    if (r >= n) return values.back();
    const double f = std::floor(r);
    const auto k = static_cast<std::size_t>(f);
    const double th = r - f;
    if (th <= 1e-12) return values[k];
    if (th >= 1.0 - 1e-12) return values[k + 1];
    switch (interp) {
        case Interp::linear:
            return values[k] + th * (values[k + 1] - values[k]);
        case Interp::right_constant:
            return values[k];
        case Interp::left_constant:
            return values[k + 1];
    }
    return values[k];
}

void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what) {
    if (a.grid != b.grid) throw InputError(std::string(what) + ": grid functions live on different grids");
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b, "operator+");
    GridFunction r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r.values[k] += b.values[k];
    return r;
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b, "operator-");
    GridFunction r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r.values[k] -= b.values[k];
    return r;
}

GridFunction operator*(double c, const GridFunction& a) {
    GridFunction r = a;
    for (auto& v : r.values) v *= c;
    return r;
}

double sup_distance(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b, "sup_distance");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
    return m;
}

GridFunction psi(const GridFunction& x) {
    GridFunction r(x.grid, 0.0, x.interp);
    double run = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        run = std::max(run, -x.values[k]);
        r.values[k] = run;
    }
    return r;
}

GridFunction phi(const GridFunction& x) {
    GridFunction p = psi(x);
    for (std::size_t k = 0; k < x.size(); ++k) p.values[k] = x.values[k] + p.values[k];
    return p;
}

NablaSet::NablaSet(GridSpec grid, double eps, std::vector<std::size_t> offsets, std::vector<IndexRun> runs)
    : grid_(grid), eps_(eps), offsets_(std::move(offsets)), runs_(std::move(runs)) {}

std::span<const IndexRun> NablaSet::runs(std::size_t k) const {
    return {runs_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
}

bool NablaSet::contains(std::size_t k, std::size_t s) const {
    for (const auto& r : runs(k))
        if (s >= r.lo && s <= r.hi) return true;
    return false;
}

std::size_t NablaSet::count(std::size_t k) const {
    std::size_t c = 0;
    for (const auto& r : runs(k)) c += r.hi - r.lo + 1;
    return c;
}

std::vector<std::size_t> NablaSet::members(std::size_t k) const {
    std::vector<std::size_t> m;
    for (const auto& r : runs(k))
        for (std::size_t s = r.lo; s <= r.hi; ++s) m.push_back(s);
    return m;
}

bool NablaSet::is_singleton_self(std::size_t k) const {
    auto rs = runs(k);
    return rs.size() == 1 && rs[0].lo == k && rs[0].hi == k;
}

bool NablaSet::isolated(std::size_t k, std::size_t s) const {
    for (const auto& r : runs(k))
        if (s >= r.lo && s <= r.hi) return r.lo == s && r.hi == s;
    return false;
}

bool NablaSet::subset_of(std::size_t k, std::size_t u) const {
    for (const auto& r : runs(k)) {
        bool covered = false;
        for (const auto& q : runs(u))
            if (r.lo >= q.lo && r.hi <= q.hi) {
                covered = true;
                break;
            }
        if (!covered) return false;
    }
    return true;
}

double default_nabla_eps(const GridFunction& x) {
    double m = 1.0;
    for (double v : x.values) m = std::max(m, std::abs(v));
    return 1e-9 * m;
}

double lipschitz_nabla_eps(double sup_density, double mu, double dt) { return 2.0 * (sup_density + mu) * dt; }

namespace {

void push_index(std::vector<IndexRun>& runs, std::size_t k) {
    if (!runs.empty() && runs.back().hi + 1 == k)
        runs.back().hi = k;
    else
        runs.push_back({k, k});
}

}  // namespace

NablaSet nabla(const GridFunction& x, double eps, bool snap_crossings) {
    if (!(eps > 0.0)) throw InputError("nabla: eps must be positive");
    const std::size_t n = x.size();
    std::vector<std::size_t> offsets{0};
    std::vector<IndexRun> all;
    std::vector<IndexRun> cur;
    double level = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double xk = x.values[k];
        const bool snapped = snap_crossings && k > 0 && x.values[k - 1] > level + eps && xk < level - eps;
        std::vector<IndexRun> before;
        if (snapped) before = cur;
        if (xk < level) {
            level = xk;
            std::vector<IndexRun> kept;
            for (const auto& r : cur)
                for (std::size_t s = r.lo; s <= r.hi; ++s)
                    if (x.values[s] <= level + eps) push_index(kept, s);
            cur.swap(kept);
        }
        if (xk <= level + eps) push_index(cur, k);
        if (snapped) {
            std::vector<std::size_t> merged;
            for (const auto* src : {&before, &cur})
                for (const auto& r : *src)
                    for (std::size_t s = r.lo; s <= r.hi; ++s) merged.push_back(s);
            std::sort(merged.begin(), merged.end());
            merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
            std::vector<IndexRun> out;
            for (auto s : merged) push_index(out, s);
            all.insert(all.end(), out.begin(), out.end());
        } else {
            all.insert(all.end(), cur.begin(), cur.end());
        }
        if (cur.empty()) throw InternalError("nabla: empty argmin set");
        offsets.push_back(all.size());
    }
    return NablaSet(x.grid, eps, std::move(offsets), std::move(all));
}

namespace {

// Range maximum over a fixed array; sparse table built on first long query.
class RangeMax {
public:
    explicit RangeMax(const std::vector<double>& v) : v_(v) {}

    double query(std::size_t lo, std::size_t hi) {
        if (hi - lo < 64) {
            double m = v_[lo];
            for (std::size_t s = lo + 1; s <= hi; ++s) m = std::max(m, v_[s]);
            return m;
        }
        if (table_.empty()) build();
        std::size_t len = hi - lo + 1;
        std::size_t j = 63 - static_cast<std::size_t>(__builtin_clzll(len));
        return std::max(table_[j][lo], table_[j][hi + 1 - (std::size_t{1} << j)]);
    }

private:
    void build() {
        table_.push_back(v_);
        for (std::size_t j = 1; (std::size_t{1} << j) <= v_.size(); ++j) {
            const auto& prev = table_.back();
            std::vector<double> next(v_.size() - (std::size_t{1} << j) + 1);
            for (std::size_t i = 0; i < next.size(); ++i)
                next[i] = std::max(prev[i], prev[i + (std::size_t{1} << (j - 1))]);
            table_.push_back(std::move(next));
        }
    }

    const std::vector<double>& v_;
    std::vector<std::vector<double>> table_;
};

}  // namespace

GridFunction directional_derivative(const GridFunction& x, const GridFunction& y, const NablaSet& nset) {
    require_same_grid(x, y, "directional_derivative");
    if (nset.grid() != x.grid || nset.size() != x.size())
        throw InputError("directional_derivative: nabla set built on a different grid");
    std::vector<double> neg(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) neg[k] = -y.values[k];
    RangeMax rm(neg);
    GridFunction out(x.grid, 0.0, Interp::right_constant);
    for (std::size_t k = 0; k < x.size(); ++k) {
        auto rs = nset.runs(k);
        if (rs.empty()) throw InternalError("directional_derivative: empty nabla entry");
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& r : rs) m = std::max(m, rm.query(r.lo, r.hi));
        out.values[k] = m;
    }
    return out;
}

std::size_t strip_visits(const GridFunction& y, double t1, double t2, double alpha, double beta) {
    if (!(alpha < beta)) throw InputError("strip_visits: degenerate strip (alpha >= beta)");
    if (!(t1 <= t2)) throw InputError("strip_visits: t1 must not exceed t2");
    std::vector<double> vals{y(t1)};
    for (std::size_t k = 0; k < y.size(); ++k) {
        double t = y.grid.at(k);
        if (t > t1 && t < t2) vals.push_back(y.values[k]);
    }
    vals.push_back(y(t2));
    enum { none, low, high } state = none;
    std::size_t count = 0;
    for (double v : vals) {
        if (v <= alpha) {
            if (state == high) ++count;
            state = low;
        } else if (v >= beta) {
            if (state == low) ++count;
            state = high;
        }
    }
    return count;
}

namespace {

double eval_linear(const GridFunction& f, double t) {
    const double r = (t - f.grid.t_min()) / f.grid.dt();
    if (r <= 0.0) return f.values.front();
    if (r >= static_cast<double>(f.grid.cells())) return f.values.back();
    const double fl = std::floor(r);
    const auto k = static_cast<std::size_t>(fl);
    const double th = r - fl;
    if (th == 0.0) return f.values[k];
    return f.values[k] + th * (f.values[k + 1] - f.values[k]);
}

// The function's own tag applies on [t_{j-1}, t_{j+1}] around the jump knot j.
double eval_near_jump(const GridFunction& f, double t, double lo, double hi) {
    if (t >= lo && t <= hi) return f(t);
    return eval_linear(f, t);
}

}  // namespace

double j1_distance_lower_bound(const GridFunction& y_n, const GridFunction& y_lim, double tau, double window,
                               double warp_budget) {
    require_same_grid(y_n, y_lim, "j1_distance_lower_bound");
    if (!(window > 0.0)) throw InputError("j1_distance_lower_bound: window must be positive");
    if (!(warp_budget > 0.0)) throw InputError("j1_distance_lower_bound: warp budget must be positive");
    const GridSpec& g = y_lim.grid;
    const std::size_t kj = g.nearest(tau);
    const double jlo = g.at(kj == 0 ? 0 : kj - 1);
    const double jhi = g.at(std::min(kj + 1, g.cells()));
    std::size_t ka = g.nearest(tau - window);
    std::size_t kb = g.nearest(tau + window);
    if (g.at(ka) < tau - window - 1e-9 * g.dt()) ++ka;
    if (g.at(kb) > tau + window + 1e-9 * g.dt()) --kb;
    if (kb <= ka) kb = std::min(ka + 1, g.cells());

    // Displacement levels d_j = -b + j*b/m; neighbouring knots may differ by
    // at most max_step levels so the slope stays within 1 +- b/window.
    constexpr int m = 10;
    constexpr int levels = 2 * m + 1;
    constexpr int subpoints = 8;
    const double step = warp_budget / m;
    const double max_dd = warp_budget * g.dt() / window;
    const int max_step = static_cast<int>(std::floor(max_dd / step + 1e-9));
    auto disp = [&](int j) { return -warp_budget + j * step; };
    auto yn = [&](double t) { return eval_near_jump(y_n, t, jlo, jhi); };
    auto yl = [&](double t) { return eval_near_jump(y_lim, t, jlo, jhi); };

    std::vector<double> val(levels), next(levels);
    for (int j = 0; j < levels; ++j) {
        const double t = g.at(ka);
        val[j] = std::abs(yn(t + disp(j)) - yl(t));
    }
    for (std::size_t k = ka; k < kb; ++k) {
        const double t0 = g.at(k);
        const double t1 = g.at(k + 1);
        for (int j2 = 0; j2 < levels; ++j2) {
            const double knot = std::abs(yn(t1 + disp(j2)) - yl(t1));
            double best = std::numeric_limits<double>::infinity();
            for (int j1 = std::max(0, j2 - max_step); j1 <= std::min(levels - 1, j2 + max_step); ++j1) {
                double worst = std::max(val[j1], knot);
                if (worst >= best) continue;
                for (int s = 1; s < subpoints && worst < best; ++s) {
                    const double th = static_cast<double>(s) / subpoints;
                    const double t = t0 + th * (t1 - t0);
                    const double d = disp(j1) + th * (disp(j2) - disp(j1));
                    worst = std::max(worst, std::abs(yn(t + d) - yl(t)));
                }
                best = std::min(best, worst);
            }
            next[j2] = best;
        }
        val.swap(next);
    }
    return *std::min_element(val.begin(), val.end());
}

std::vector<std::size_t> usc_violations(const GridFunction& v, double jump_tol) {
    std::vector<std::size_t> bad;
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
        const double lo = std::min(v.values[k - 1], v.values[k + 1]);
        if (v.values[k] < lo - jump_tol) bad.push_back(k);
    }
    return bad;
}

void write_csv(std::ostream& os, const GridFunction& f, const std::string& header_comment) {
    CsvWriter w(os);
    if (!header_comment.empty()) w.comment(header_comment);
    w.comment(std::string("interp=") + interp_name(f.interp));
    w.comment("grid t_min=" + fmt(f.grid.t_min()) + " t_max=" + fmt(f.grid.t_max()) + " dt=" + fmt(f.grid.dt()));
    w.row({"t", "value"});
    for (std::size_t k = 0; k < f.size(); ++k) w.row({fmt(f.grid.at(k)), fmt(f.values[k])});
}

GridFunction read_csv(std::istream& is) {
    std::string line;
    Interp interp = Interp::linear;
    double t_min = 0, t_max = 0, dt = 0;
    bool have_grid = false;
    std::vector<double> values;
    while (std::getline(is, line)) {
        if (line.rfind("# interp=", 0) == 0) {
            interp = parse_interp(line.substr(9));
        } else if (line.rfind("# grid ", 0) == 0) {
            std::istringstream ss(line.substr(7));
            std::string tok;
            while (ss >> tok) {
                auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                auto key = tok.substr(0, eq);
                double val = parse_double(tok.substr(eq + 1));
                if (key == "t_min") t_min = val;
                if (key == "t_max") t_max = val;
                if (key == "dt") dt = val;
            }
            have_grid = true;
        } else if (line.empty() || line[0] == '#' || line.rfind("t,", 0) == 0) {
            continue;
        } else {
            auto cells = split_csv_line(line);
            if (cells.size() != 2) throw InputError("grid csv: expected two columns");
            values.push_back(parse_double(cells[1]));
        }
    }
    if (!have_grid) throw InputError("grid csv: missing grid header comment");
    return GridFunction(GridSpec(t_min, t_max, dt), std::move(values), interp);
}

}  // namespace transq
