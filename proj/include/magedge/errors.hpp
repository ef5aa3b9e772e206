#ifndef MAGEDGE_ERRORS_HPP
#define MAGEDGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace magedge {

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// kernel evaluated on its diagonal
struct singularity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct accuracy_error : std::runtime_error {
    double achieved;
    accuracy_error(const std::string& what, double achieved_estimate)
        : std::runtime_error(what), achieved(achieved_estimate) {}
};

// Neumann/W series refused, carries measured operator bound
struct contraction_error : std::runtime_error {
    double bound;
    contraction_error(const std::string& what, double measured)
        : std::runtime_error(what), bound(measured) {}
};

struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct solver_error : std::runtime_error {
    double residual;
    solver_error(const std::string& what, double achieved_residual)
        : std::runtime_error(what), residual(achieved_residual) {}
};

} // namespace magedge

#endif
