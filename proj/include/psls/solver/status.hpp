#pragma once

#include <string>

namespace psls::solver {

enum class Status { Optimal, Infeasible, Unbounded, BadProblem, IterationLimit };

inline std::string to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::BadProblem: return "bad_problem";
        case Status::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

}  // namespace psls::solver
