#pragma once

#include <optional>
#include <string>
#include <vector>

#include "transq/fluid.hpp"
#include "transq/gridfn.hpp"

namespace transq {

enum class Regime { pre_service, overloaded, critical, underloaded };

// Bit flags; a grid time may carry several (e.g. middle and end of critical).
enum StateFlag : unsigned {
    state_none = 0,
    end_of_overloading = 1u << 0,
    onset_of_critical = 1u << 1,
    middle_of_critical = 1u << 2,
    end_of_critical = 1u << 3,
};

// discontinuity_capable: both the left and the right condition hold; which
// one a sample path realizes depends on the path.
enum class Continuity { continuous, left_discontinuity, right_discontinuity, discontinuity_capable };

const char* regime_name(Regime r);
std::string state_name(unsigned flags);
const char* continuity_name(Continuity c);

struct RegimeAnnotation {
    GridSpec grid;
    double eps;
    std::vector<Regime> regime;
    std::vector<unsigned> state;
    std::vector<Continuity> continuity;

    std::vector<std::size_t> discontinuity_points() const;
};

// Argmin correspondence of the fluid netput at the solution's tolerance, with
// level crossings inside a cell snapped to the cell's right end.
NablaSet fluid_nabla(const FluidSolution& fl);

// overloaded: qbar > eps. pre-service: otherwise, t <= 0. critical: psibar
// rose by at most eps over the previous cell, or the previous point was
// overloaded (the crossing lies in that cell). underloaded: otherwise.
// Continuity tags are left continuous; see classify_continuity.
RegimeAnnotation classify_regimes(const FluidSolution& fl, std::optional<double> eps = {});

RegimeAnnotation classify_continuity(const NablaSet& nset, RegimeAnnotation ann);

}  // namespace transq
