#include "mfsmp/regression.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace mfsmp {

RegressionResult regress_conditional(std::span<const double> targets,
                                     const std::vector<std::vector<double>>& features,
                                     double ridge) {
    const std::size_t n = targets.size();
    if (n == 0 || features.size() != n)
        throw std::invalid_argument("regress_conditional: empty or mismatched inputs");
    const std::size_t p = features.front().size();
    if (p == 0) throw std::invalid_argument("regress_conditional: empty feature rows");
    if (n <= p)
        throw std::invalid_argument("regress_conditional: need more samples than features");

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                 static_cast<Eigen::Index>(p));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t s = 0; s < n; ++s) {
        const auto& row = features[s];
        if (row.size() != p)
            throw std::invalid_argument("regress_conditional: ragged feature rows");
        for (std::size_t a = 0; a < p; ++a) {
            rhs(static_cast<Eigen::Index>(a)) += row[a] * targets[s];
            for (std::size_t b = a; b < p; ++b)
                gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += row[a] * row[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b)
            gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                gram(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));

    auto solve = [&](double lambda) {
        Eigen::MatrixXd g = gram;
        if (lambda > 0.0) {
            const double scale = gram.trace() / static_cast<double>(p);
            g.diagonal().array() += lambda * (scale > 0.0 ? scale : 1.0);
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
        return std::pair<bool, Eigen::VectorXd>(ldlt.info() == Eigen::Success,
                                                ldlt.solve(rhs));
    };

    auto acceptable = [](bool good, const Eigen::VectorXd& b) {
        return good && b.allFinite() && b.lpNorm<Eigen::Infinity>() < 1e12;
    };
    auto [ok, beta] = solve(0.0);
    if (!acceptable(ok, beta)) std::tie(ok, beta) = solve(ridge);
    if (!acceptable(ok, beta))
        throw std::runtime_error("regress_conditional: singular normal equations");

    RegressionResult out;
    out.coefficients.assign(beta.data(), beta.data() + p);
    out.fitted.resize(n);
    double y_mean = 0.0;
    for (double y : targets) y_mean += y;
    y_mean /= static_cast<double>(n);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        double fit = 0.0;
        for (std::size_t a = 0; a < p; ++a) fit += out.coefficients[a] * features[s][a];
        out.fitted[s] = fit;
        ss_res += (targets[s] - fit) * (targets[s] - fit);
        ss_tot += (targets[s] - y_mean) * (targets[s] - y_mean);
    }
    out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

std::vector<double> observation_features(double y, double running_max) {
    return {1.0, y, y * y, running_max};
}

std::vector<double> sample_features(double x, double l, double u, double spike_indicator) {
    return {1.0, x, l, u, x * x, x * l, u * u, spike_indicator};
}

}  // namespace mfsmp
