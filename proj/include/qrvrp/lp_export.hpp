#pragma once

#include <string>
#include <string_view>

#include "qrvrp/routing.hpp"

namespace qrvrp {

/// Writes the two-index MIP for the problem in CPLEX LP format.
///
/// Node 0 is the start depot and node n+1 the end depot; arcs are (0,j),
/// (i,j) for customers i != j, and (i,n+1). Variables:
///   x_i_j   binary arc selection
///   u_i     load after customer i (deterministic), or
///   u_i_g   load after i when g customers take their worst case (robust)
///   w_i     service start at customer i
/// The depot load and start time enter as constants (0 and the depot ready
/// time). Load and time constraints are written for arcs entering a
/// customer; arcs into n+1 constrain nothing because the end depot carries
/// no variables. The big-M for time is depot due + max service + max travel.
std::string export_lp(const RoutingProblem& problem);

/// Big-M used by export_lp for the time-propagation constraints.
double lp_time_big_m(const RoutingProblem& problem);

/// Reads an external solver result: one line "objective <value>" followed by
/// lines "x_i_j <value>" (only arcs with value > 0.5 are used; other
/// variables are ignored). Routes are rebuilt by following arcs from node 0.
Solution parse_external_solution(std::string_view text, const RoutingProblem& problem, double* objective = nullptr);

}  // namespace qrvrp
