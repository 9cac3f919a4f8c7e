#include "transq/regimes.hpp"

#include "transq/error.hpp"

namespace transq {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::pre_service:
            return "pre-service";
        case Regime::overloaded:
            return "overloaded";
        case Regime::critical:
            return "critical";
        case Regime::underloaded:
            return "underloaded";
    }
    return "?";
}

std::string state_name(unsigned flags) {
    if (flags == state_none) return "none";
    std::string s;
    auto add = [&](unsigned bit, const char* name) {
        if (!(flags & bit)) return;
        if (!s.empty()) s += '+';
        s += name;
    };
    add(end_of_overloading, "end-of-overloading");
    add(onset_of_critical, "onset-of-critical");
    add(middle_of_critical, "middle-of-critical");
    add(end_of_critical, "end-of-critical");
    return s;
}

const char* continuity_name(Continuity c) {
    switch (c) {
        case Continuity::continuous:
            return "continuous";
        case Continuity::left_discontinuity:
            return "left-discontinuity";
        case Continuity::right_discontinuity:
            return "right-discontinuity";
        case Continuity::discontinuity_capable:
            return "discontinuity-capable";
    }
    return "?";
}

std::vector<std::size_t> RegimeAnnotation::discontinuity_points() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < continuity.size(); ++k)
        if (continuity[k] != Continuity::continuous) out.push_back(k);
    return out;
}

NablaSet fluid_nabla(const FluidSolution& fl) { return nabla(fl.xbar, fl.eps, true); }

RegimeAnnotation classify_regimes(const FluidSolution& fl, std::optional<double> eps_in) {
    const double eps = eps_in ? *eps_in : fl.eps;
    if (!(eps > 0.0)) throw InputError("classify_regimes: eps must be positive");
    const std::size_t n = fl.grid.size();
    RegimeAnnotation ann{fl.grid, eps, std::vector<Regime>(n), std::vector<unsigned>(n, state_none),
                         std::vector<Continuity>(n, Continuity::continuous)};
    for (std::size_t k = 0; k < n; ++k) {
        const double t = fl.grid.at(k);
        if (fl.qbar.values[k] > eps)
            ann.regime[k] = Regime::overloaded;
        else if (t <= 0.0)
            ann.regime[k] = Regime::pre_service;
        else if (k > 0 && (fl.psibar.values[k] - fl.psibar.values[k - 1] <= eps || ann.regime[k - 1] == Regime::overloaded))
            ann.regime[k] = Regime::critical;
        else
            ann.regime[k] = Regime::underloaded;
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (ann.regime[k] != Regime::critical) continue;
        const bool has_prev = k > 0;
        const bool has_next = k + 1 < n;
        const Regime prev = has_prev ? ann.regime[k - 1] : Regime::pre_service;
        const Regime next = has_next ? ann.regime[k + 1] : Regime::critical;
        unsigned s = state_none;
        if ((has_prev && prev == Regime::overloaded) || (has_next && next == Regime::overloaded)) s |= end_of_overloading;
        if (has_prev && prev == Regime::underloaded) s |= onset_of_critical;
        if (has_prev && prev == Regime::critical) s |= middle_of_critical;
        if (has_prev && prev == Regime::critical && has_next && next == Regime::underloaded) s |= end_of_critical;
        ann.state[k] = s;
    }
    return ann;
}

RegimeAnnotation classify_continuity(const NablaSet& nset, RegimeAnnotation ann) {
    if (nset.grid() != ann.grid) throw InputError("classify_continuity: nabla set and annotation grids differ");
    const std::size_t n = nset.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (nset.is_singleton_self(k) || !nset.contains(k, k)) {
            ann.continuity[k] = Continuity::continuous;
            continue;
        }
        const bool left = nset.isolated(k, k);
        bool right = false;
        if (k + 1 < n) {
            right = true;
            for (const auto& r : nset.runs(k + 1))
                if (r.lo <= k) right = false;
        }
        if (left && right)
            ann.continuity[k] = Continuity::discontinuity_capable;
        else if (left)
            ann.continuity[k] = Continuity::left_discontinuity;
        else if (right)
            ann.continuity[k] = Continuity::right_discontinuity;
        else
            ann.continuity[k] = Continuity::continuous;
    }
    return ann;
}

}  // namespace transq
