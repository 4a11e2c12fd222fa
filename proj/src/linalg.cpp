#include "linalg.hpp"

#include <sstream>

namespace sninf::detail {

double condition_number(const Matrix& m) {
    const Matrix sym = 0.5 * (m + m.transpose());
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues();
    if (!(ev.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
    return ev.maxCoeff() / ev.minCoeff();
}

std::optional<QuadraticForm> try_quadratic_form(const Matrix& m, const Vector& x, double scale2, double* condition) {
    QuadSolver solver;
    auto q = solver.solve(m, x, scale2);
    if (condition) *condition = solver.last_condition();
    return q;
}

QuadraticForm quadratic_form(const Matrix& m, const Vector& x, double scale2, const std::string& what) {
    QuadSolver solver;
    auto q = solver.solve(m, x, scale2);
    if (!q) {
        std::ostringstream os;
        os << what << " is singular (condition number " << solver.last_condition() << ")";
        throw SingularityError(os.str(), solver.last_condition());
    }
    return *q;
}

}  // namespace sninf::detail
