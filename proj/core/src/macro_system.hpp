#pragma once

#include "coupled_system.hpp"
#include "homog/macro_solver.hpp"

namespace homog::detail {

CoupledSystem build_macro_system(const MacroProblem& problem);

CoupledFields fields_of(const MacroState& state);

}  // namespace homog::detail
