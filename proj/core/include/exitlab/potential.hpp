#pragma once

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace exitlab {

/// Points are stored as 2-vectors; in dimension 1 only the first
/// component is meaningful and the second is kept at zero.
using Vec = Eigen::Vector2d;
using Mat = Eigen::Matrix2d;

struct Evaluation {
    double f = 0.0;
    Vec grad = Vec::Zero();
    Mat hess = Mat::Zero();
};

/// Interface implemented by every concrete potential.
class PotentialModel {
public:
    virtual ~PotentialModel() = default;
    [[nodiscard]] virtual int dimension() const = 0;
    [[nodiscard]] virtual double value(const Vec& x) const = 0;
    [[nodiscard]] virtual Vec grad(const Vec& x) const = 0;
    [[nodiscard]] virtual Mat hess(const Vec& x) const = 0;
};

/// Smooth scalar field f on R^d, d in {1,2}. Cheap to copy (shared model).
class PotentialField {
public:
    PotentialField(std::shared_ptr<const PotentialModel> model, std::optional<std::string> catalog_id = {});

    [[nodiscard]] int dimension() const noexcept { return dim_; }
    [[nodiscard]] double value(const Vec& x) const { return model_->value(x); }
    [[nodiscard]] double operator()(const Vec& x) const { return model_->value(x); }
    [[nodiscard]] Vec grad(const Vec& x) const { return model_->grad(x); }
    [[nodiscard]] Mat hess(const Vec& x) const { return model_->hess(x); }
    [[nodiscard]] Evaluation eval_all(const Vec& x) const;

    [[nodiscard]] double value1(double x) const { return model_->value(Vec(x, 0.0)); }
    [[nodiscard]] double grad1(double x) const { return model_->grad(Vec(x, 0.0))(0); }

    [[nodiscard]] const std::optional<std::string>& catalog_id() const noexcept { return id_; }

    /// f + c. Used to check invariance of rates under constant shifts.
    [[nodiscard]] PotentialField shifted(double c) const;

private:
    std::shared_ptr<const PotentialModel> model_;
    std::optional<std::string> id_;
    int dim_;
};

/// c * x^px * y^py
struct Monomial {
    double coeff = 0.0;
    int px = 0;
    int py = 0;
};

/// amplitude * exp(-((x-cx)^2/(2 wx^2) + (y-cy)^2/(2 wy^2)))
struct GaussianBump {
    double amplitude = 0.0;
    Vec center = Vec::Zero();
    Vec width = Vec::Ones();
};

PotentialField make_polynomial(int dim, std::vector<Monomial> terms);
PotentialField make_gaussian_sum(int dim, std::vector<Monomial> base, std::vector<GaussianBump> bumps);

namespace catalog {

/// (x^2-1)^2, symmetric double well.
PotentialField p1();
/// 6 sin(x) exp(-x/5).
PotentialField p2();
/// x^2 + 2 y^2.
PotentialField p3();
PotentialField flat(int dim);
/// |x|^2 / 2
PotentialField quadratic_bowl(int dim);
/// slope * x (d=1)
PotentialField linear(double slope);
/// x^2 on an off-centre interval: two boundary channels with different heights.
PotentialField asymmetric_well();

/// Lookup by id: "P1", "P2", "P3", "flat1d", "flat2d", "bowl1d", "bowl2d",
/// "linear", "asym-well", "double-well-wide". Throws InvalidArgument.
PotentialField by_id(const std::string& id);
std::vector<std::string> ids();

}  // namespace catalog

}  // namespace exitlab
