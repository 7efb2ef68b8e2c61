// Compiled as C++17: boost::numeric::ublas (required by odeint's Rosenbrock
// steppers) does not build under C++20 with Boost 1.7x.

#include "aubrykit/stiff_runner.hpp"

#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/rosenbrock4.hpp>
#include <boost/numeric/odeint/stepper/rosenbrock4_controller.hpp>
#include <boost/numeric/odeint/stepper/rosenbrock4_dense_output.hpp>
#include <boost/numeric/ublas/matrix.hpp>
#include <boost/numeric/ublas/vector.hpp>

namespace aubrykit {

namespace {

namespace odeint = boost::numeric::odeint;
using UVec = boost::numeric::ublas::vector<double>;
using UMat = boost::numeric::ublas::matrix<double>;

Eigen::VectorXd to_eigen(const UVec& u) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(u.size()));
    for (size_t i = 0; i < u.size(); ++i) x[static_cast<Eigen::Index>(i)] = u[i];
    return x;
}

struct Sys {
    const ActionEvaluator* ev;
    void operator()(const UVec& u, UVec& dudt, double) const {
        Eigen::VectorXd g;
        ev->gradient(to_eigen(u), g);
        dudt.resize(u.size());
        for (size_t i = 0; i < u.size(); ++i) dudt[i] = -g[static_cast<Eigen::Index>(i)];
    }
};

struct Jac {
    const ActionEvaluator* ev;
    void operator()(const UVec& u, UMat& j, const double&, UVec& dfdt) const {
        Eigen::MatrixXd h;
        ev->hessian(to_eigen(u), h);
        j.resize(u.size(), u.size());
        for (size_t r = 0; r < u.size(); ++r)
            for (size_t c = 0; c < u.size(); ++c)
                j(r, c) = -h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        dfdt.resize(u.size());
        for (size_t i = 0; i < u.size(); ++i) dfdt[i] = 0.0;
    }
};

}  // namespace

struct StiffOrbitRunner::Impl {
    const ActionEvaluator* ev;
    odeint::rosenbrock4_dense_output<odeint::rosenbrock4_controller<odeint::rosenbrock4<double>>>
        stepper;

    Impl(const ActionEvaluator& e, double abs_tol, double rel_tol)
        : ev(&e),
          stepper(odeint::rosenbrock4_controller<odeint::rosenbrock4<double>>(abs_tol, rel_tol)) {}
};

StiffOrbitRunner::StiffOrbitRunner(const ActionEvaluator& ev, double abs_tol, double rel_tol)
    : impl_(std::make_unique<Impl>(ev, abs_tol, rel_tol)) {}

StiffOrbitRunner::~StiffOrbitRunner() = default;

void StiffOrbitRunner::initialize(const Eigen::VectorXd& x, double t, double dt0) {
    UVec u(static_cast<size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i) u[static_cast<size_t>(i)] = x[i];
    impl_->stepper.initialize(u, t, dt0);
}

void StiffOrbitRunner::do_step() {
    impl_->stepper.do_step(std::make_pair(Sys{impl_->ev}, Jac{impl_->ev}));
}

double StiffOrbitRunner::current_time() const { return impl_->stepper.current_time(); }

Eigen::VectorXd StiffOrbitRunner::current_state() const {
    return to_eigen(impl_->stepper.current_state());
}

Eigen::VectorXd StiffOrbitRunner::state_at(double t) {
    UVec u(impl_->stepper.current_state().size());
    impl_->stepper.calc_state(t, u);
    return to_eigen(u);
}

}  // namespace aubrykit
