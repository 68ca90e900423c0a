#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "scatterid/error.hpp"
#include "scatterid/specfun.hpp"

namespace scatterid {

using json = nlohmann::json;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Gaussian corner-smoothing width for rounded polygons, as a fraction of the
/// polygon diameter. Gives a minimum radius of curvature of about 5% of the
/// diameter on the square.
inline constexpr double kCornerSmoothing = 0.03;

enum class ShapeKind { Disk, Ellipse, RoundedPolygon, LetterA };

inline std::string to_string(ShapeKind k) {
    switch (k) {
        case ShapeKind::Disk: return "disk";
        case ShapeKind::Ellipse: return "ellipse";
        case ShapeKind::RoundedPolygon: return "rounded_polygon";
        case ShapeKind::LetterA: return "letter_a";
    }
    return "?";
}

inline ShapeKind shape_kind_from_string(const std::string& s) {
    if (s == "disk") return ShapeKind::Disk;
    if (s == "ellipse") return ShapeKind::Ellipse;
    if (s == "rounded_polygon") return ShapeKind::RoundedPolygon;
    if (s == "letter_a") return ShapeKind::LetterA;
    throw ConfigError("unknown shape kind '" + s + "'");
}

/// x -> z + s R_theta x
struct RigidMotion {
    Point z{0.0, 0.0};
    double s = 1.0;
    double theta = 0.0;

    Point apply(const Point& x) const {
        const double c = std::cos(theta), sn = std::sin(theta);
        return z + s * Point(c * x.x() - sn * x.y(), sn * x.x() + c * x.y());
    }
    Point apply_linear(const Point& v) const {
        const double c = std::cos(theta), sn = std::sin(theta);
        return s * Point(c * v.x() - sn * v.y(), sn * v.x() + c * v.y());
    }
    /// this ∘ inner
    RigidMotion compose(const RigidMotion& inner) const {
        return {apply(inner.z), s * inner.s, theta + inner.theta};
    }
    RigidMotion inverse() const {
        const RigidMotion rot{{0.0, 0.0}, 1.0 / s, -theta};
        return {-rot.apply(z), 1.0 / s, -theta};
    }
    bool is_identity() const { return z.isZero(0.0) && s == 1.0 && theta == 0.0; }
};

struct CurveSample {
    Point pos;
    Point d1;  // dx/dt
    Point d2;  // d2x/dt2
};

namespace detail {

inline cplx to_c(const Point& p) { return {p.x(), p.y()}; }
inline Point to_p(const cplx& c) { return {c.real(), c.imag()}; }

inline double polyline_diameter(const std::vector<Point>& pts) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d2 = std::max(d2, (pts[i] - pts[j]).squaredNorm());
    return std::sqrt(d2);
}

/// Fourier coefficients (k = -M..M, stored at k + M) of the arc-length
/// parametrized polygon after Gaussian smoothing of width sigma, rescaled to
/// the requested diameter and shifted so that its area centroid is the origin.
inline std::vector<cplx> smoothed_polygon_coefficients(const std::vector<Point>& verts, double diameter,
                                                       double smoothing) {
    const std::size_t nv = verts.size();
    std::vector<double> s(nv + 1, 0.0);
    for (std::size_t i = 0; i < nv; ++i) s[i + 1] = s[i] + (verts[(i + 1) % nv] - verts[i]).norm();
    const double perimeter = s[nv];
    const double sigma = smoothing * polyline_diameter(verts);
    const double tau = kTwoPi * sigma / perimeter;
    const int M = static_cast<int>(std::ceil(9.0 / tau));

    std::vector<cplx> c(2 * static_cast<std::size_t>(M) + 1, 0.0);
    std::vector<double> t(nv + 1);
    for (std::size_t i = 0; i <= nv; ++i) t[i] = kTwoPi * s[i] / perimeter;
    cplx c0 = 0.0;
    for (std::size_t i = 0; i < nv; ++i) c0 += (t[i + 1] - t[i]) * 0.5 * (to_c(verts[i]) + to_c(verts[(i + 1) % nv]));
    c[static_cast<std::size_t>(M)] = c0 / kTwoPi;
    for (int k = 1; k <= M; ++k) {
        for (int sg : {1, -1}) {
            const int kk = sg * k;
            cplx acc = 0.0;
            for (std::size_t i = 0; i < nv; ++i) {
                const cplx d = (to_c(verts[(i + 1) % nv]) - to_c(verts[i])) / (t[i + 1] - t[i]);
                acc += d * (std::polar(1.0, -kk * t[i + 1]) - std::polar(1.0, -kk * t[i]));
            }
            const double damp = std::exp(-0.5 * (k * tau) * (k * tau));
            c[static_cast<std::size_t>(kk + M)] = acc / (kTwoPi * k * k) * damp;
        }
    }

    // normalize: diameter and area centroid of the smoothed curve
    const int ns = 2048;
    std::vector<Point> pts(ns);
    std::vector<Point> der(ns);
    for (int j = 0; j < ns; ++j) {
        const double tj = kTwoPi * j / ns;
        cplx z = 0.0, dz = 0.0;
        for (int k = -M; k <= M; ++k) {
            const cplx e = std::polar(1.0, k * tj) * c[static_cast<std::size_t>(k + M)];
            z += e;
            dz += cplx(0.0, k) * e;
        }
        pts[static_cast<std::size_t>(j)] = to_p(z);
        der[static_cast<std::size_t>(j)] = to_p(dz);
    }
    double area = 0.0, mx = 0.0, my = 0.0;
    for (int j = 0; j < ns; ++j) {
        const Point& p = pts[static_cast<std::size_t>(j)];
        const Point& d = der[static_cast<std::size_t>(j)];
        area += 0.5 * (p.x() * d.y() - p.y() * d.x());
        mx += 0.5 * p.x() * p.x() * d.y();
        my -= 0.5 * p.y() * p.y() * d.x();
    }
    const Point centroid(mx / area, my / area);
    const double scale = diameter / polyline_diameter(pts);
    for (auto& v : c) v *= scale;
    c[static_cast<std::size_t>(M)] -= to_c(centroid) * scale;
    return c;
}

}  // namespace detail

/// A smooth, positively oriented closed curve t in [0, 2pi) -> R^2 placed by a
/// rigid motion.
class Shape {
public:
    static Shape disk(double radius, Point center = {0.0, 0.0}) {
        detail::require(radius > 0.0, "disk radius must be positive");
        Shape s(ShapeKind::Disk);
        s.params_ = {radius};
        s.placement_.z = center;
        return s;
    }

    static Shape ellipse(double a, double b, Point center = {0.0, 0.0}, double theta = 0.0) {
        detail::require(a > 0.0 && b > 0.0, "ellipse semi-axes must be positive");
        Shape s(ShapeKind::Ellipse);
        s.params_ = {a, b};
        s.placement_ = {center, 1.0, theta};
        return s;
    }

    /// Polygon (counter-clockwise vertices) with Gaussian-rounded corners,
    /// normalized to the given diameter and centered on its area centroid.
    static Shape rounded_polygon(std::vector<Point> vertices, double diameter, Point center = {0.0, 0.0},
                                 double theta = 0.0, ShapeKind kind = ShapeKind::RoundedPolygon,
                                 double smoothing = kCornerSmoothing) {
        detail::require(vertices.size() >= 3, "polygon needs at least 3 vertices");
        detail::require(diameter > 0.0 && smoothing > 0.0, "polygon diameter and smoothing must be positive");
        double signed_area = 0.0;
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            const Point& a = vertices[i];
            const Point& b = vertices[(i + 1) % vertices.size()];
            signed_area += a.x() * b.y() - a.y() * b.x();
        }
        detail::require(signed_area > 0.0, "polygon vertices must be counter-clockwise");
        Shape s(kind);
        s.params_ = {diameter, smoothing};
        s.vertices_ = std::move(vertices);
        s.placement_ = {center, 1.0, theta};
        s.coeffs_ = std::make_shared<const std::vector<cplx>>(
            detail::smoothed_polygon_coefficients(s.vertices_, diameter, smoothing));
        return s;
    }

    static Shape regular_polygon(int sides, double diameter, Point center = {0.0, 0.0}, double theta = 0.0) {
        std::vector<Point> v;
        for (int i = 0; i < sides; ++i) {
            const double a = std::numbers::pi / 2 + kTwoPi * i / sides;
            v.emplace_back(std::cos(a), std::sin(a));
        }
        return rounded_polygon(std::move(v), diameter, center, theta);
    }

    static Shape rectangle(double aspect, double diameter, Point center = {0.0, 0.0}, double theta = 0.0) {
        const double hx = 0.5 * aspect, hy = 0.5;
        return rounded_polygon({{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}}, diameter, center, theta);
    }

    static Shape square(double diameter, Point center = {0.0, 0.0}, double theta = 0.0) {
        return rectangle(1.0, diameter, center, theta);
    }

    /// Solid sans-serif capital A (outline only, no counter).
    static Shape letter_a(double diameter, Point center = {0.0, 0.0}, double theta = 0.0) {
        std::vector<Point> v{{-0.50, -0.50}, {-0.30, -0.50}, {-0.20, -0.20}, {-0.12, -0.14},
                             {0.12, -0.14},  {0.20, -0.20},  {0.30, -0.50},  {0.50, -0.50},
                             {0.09, 0.50},   {0.00, 0.52},   {-0.09, 0.50}};
        return rounded_polygon(std::move(v), diameter, center, theta, ShapeKind::LetterA);
    }

    ShapeKind kind() const { return kind_; }
    const std::vector<double>& params() const { return params_; }
    const std::vector<Point>& vertices() const { return vertices_; }
    const RigidMotion& placement() const { return placement_; }

    Shape moved(const RigidMotion& m) const {
        Shape out = *this;
        out.placement_ = m.compose(placement_);
        return out;
    }

    CurveSample eval(double t) const {
        CurveSample b = eval_base(t);
        return {placement_.apply(b.pos), placement_.apply_linear(b.d1), placement_.apply_linear(b.d2)};
    }

    std::vector<Point> sample(int n) const {
        std::vector<Point> out(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = eval(kTwoPi * j / n).pos;
        return out;
    }

    /// Largest distance from `about` to the curve (sampled).
    double circumradius(const Point& about = {0.0, 0.0}, int n = 1024) const {
        double r = 0.0;
        for (const auto& p : sample(n)) r = std::max(r, (p - about).norm());
        return r;
    }

private:
    explicit Shape(ShapeKind k) : kind_(k) {}

    CurveSample eval_base(double t) const {
        switch (kind_) {
            case ShapeKind::Disk: {
                const double r = params_[0], c = std::cos(t), s = std::sin(t);
                return {{r * c, r * s}, {-r * s, r * c}, {-r * c, -r * s}};
            }
            case ShapeKind::Ellipse: {
                const double a = params_[0], b = params_[1], c = std::cos(t), s = std::sin(t);
                return {{a * c, b * s}, {-a * s, b * c}, {-a * c, -b * s}};
            }
            default: {
                const auto& cf = *coeffs_;
                const int M = static_cast<int>(cf.size() / 2);
                cplx z = 0.0, dz = 0.0, ddz = 0.0;
                const cplx step = std::polar(1.0, t);
                cplx e = std::polar(1.0, -M * t);
                for (int k = -M; k <= M; ++k) {
                    const cplx term = cf[static_cast<std::size_t>(k + M)] * e;
                    z += term;
                    dz += cplx(0.0, k) * term;
                    ddz -= static_cast<double>(k) * k * term;
                    e *= step;
                }
                return {detail::to_p(z), detail::to_p(dz), detail::to_p(ddz)};
            }
        }
    }

    ShapeKind kind_;
    std::vector<double> params_;
    std::vector<Point> vertices_;
    RigidMotion placement_{};
    std::shared_ptr<const std::vector<cplx>> coeffs_;
};

struct Material {
    double sigma = 1.0;
    double mu = 1.0;
    double contrast_wavenumber(double omega) const { return omega * std::sqrt(sigma * mu); }
};

struct Inclusion {
    Shape shape;
    Material material;
};

/// Winding number of a closed polyline around p (nonzero means inside).
inline int winding_number(const std::vector<Point>& poly, const Point& p) {
    int wn = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && cross > 0) ++wn;
        } else if (b.y() <= p.y() && cross < 0) {
            --wn;
        }
    }
    return wn;
}

/// Piecewise-constant target: background | shell (exterior curve) | inclusions.
struct TargetConfig {
    std::string id;
    Shape exterior = Shape::disk(0.5);
    Material background{1.0, 1.0};
    Material shell{1.0, 1.0};
    std::vector<Inclusion> inclusions;

    /// Throws std::invalid_argument when materials or curve nesting are invalid.
    void validate() const {
        auto positive = [](const Material& m) { return m.sigma > 0.0 && m.mu > 0.0; };
        detail::require(positive(background) && positive(shell), "material constants must be positive");
        detail::require(inclusions.size() <= 2, "at most two inclusions are supported");
        const int ns = 512;
        const auto ext = exterior.sample(ns);
        double ext_spacing = 0.0;
        for (std::size_t j = 0; j < ext.size(); ++j)
            ext_spacing = std::max(ext_spacing, (ext[j] - ext[(j + 1) % ext.size()]).norm());
        std::vector<std::vector<Point>> inc;
        for (const auto& in : inclusions) {
            detail::require(positive(in.material), "material constants must be positive");
            inc.push_back(in.shape.sample(ns));
            for (const auto& p : inc.back()) {
                detail::require(winding_number(ext, p) != 0, "inclusion leaves the exterior curve");
                for (const auto& q : ext)
                    detail::require((p - q).norm() > ext_spacing, "inclusion touches the exterior curve");
            }
        }
        if (inc.size() == 2) {
            for (const auto& p : inc[0]) detail::require(winding_number(inc[1], p) == 0, "inclusions overlap");
            for (const auto& p : inc[1]) detail::require(winding_number(inc[0], p) == 0, "inclusions overlap");
            for (const auto& p : inc[0])
                for (const auto& q : inc[1]) detail::require((p - q).norm() > 1e-3, "inclusions touch");
        }
    }

    std::size_t curve_count() const { return 1 + inclusions.size(); }
};

struct DiscretizedBoundary {
    std::vector<Point> nodes;
    std::vector<Point> normals;   // outward unit normals
    std::vector<double> weights;  // (2pi/n) |x'(t_j)|
    std::vector<double> params;   // t_j
    std::vector<double> speed;    // |x'(t_j)|
    std::vector<double> curvature;

    std::size_t size() const { return nodes.size(); }
    double perimeter() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
    double max_spacing() const {
        double h = 0.0;
        for (std::size_t j = 0; j < size(); ++j) h = std::max(h, (nodes[j] - nodes[(j + 1) % size()]).norm());
        return h;
    }
};

/// Equispaced-in-parameter nodes with trapezoidal weights.
inline DiscretizedBoundary discretize(const Shape& shape, int n) {
    detail::require(n >= 16 && n % 2 == 0, "discretize: n must be even and >= 16");
    DiscretizedBoundary d;
    const auto un = static_cast<std::size_t>(n);
    d.nodes.resize(un);
    d.normals.resize(un);
    d.weights.resize(un);
    d.params.resize(un);
    d.speed.resize(un);
    d.curvature.resize(un);
    for (int j = 0; j < n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        const double t = kTwoPi * j / n;
        const CurveSample c = shape.eval(t);
        const double sp = c.d1.norm();
        d.params[uj] = t;
        d.nodes[uj] = c.pos;
        d.speed[uj] = sp;
        d.normals[uj] = Point(c.d1.y(), -c.d1.x()) / sp;
        d.weights[uj] = kTwoPi / n * sp;
        d.curvature[uj] = (c.d1.x() * c.d2.y() - c.d1.y() * c.d2.x()) / (sp * sp * sp);
    }
    return d;
}

inline TargetConfig apply_motion(const TargetConfig& cfg, const RigidMotion& m) {
    TargetConfig out = cfg;
    out.exterior = cfg.exterior.moved(m);
    for (auto& in : out.inclusions) in.shape = in.shape.moved(m);
    return out;
}

/// The 14-element dictionary: 6 homogeneous shapes, 5 disks with one
/// inclusion, 3 disks with two inclusions. All of diameter 1 at the origin.
inline std::vector<TargetConfig> catalog() {
    const Material background{1.0, 1.0};
    const Material shell{3.0, 3.0};
    const Material core{6.0, 6.0};
    std::vector<TargetConfig> out;
    auto homogeneous = [&](std::string id, Shape s) {
        out.push_back(TargetConfig{std::move(id), std::move(s), background, shell, {}});
    };
    homogeneous("disk", Shape::disk(0.5));
    homogeneous("ellipse", Shape::ellipse(0.5, 0.3));
    homogeneous("triangle", Shape::regular_polygon(3, 1.0));
    homogeneous("square", Shape::square(1.0));
    homogeneous("rectangle", Shape::rectangle(2.0, 1.0));
    homogeneous("letter_a", Shape::letter_a(1.0));

    auto layered = [&](std::string id, std::vector<Shape> inner) {
        TargetConfig t{std::move(id), Shape::disk(0.5), background, shell, {}};
        for (auto& s : inner) t.inclusions.push_back({std::move(s), core});
        out.push_back(std::move(t));
    };
    layered("disk_circle", {Shape::disk(0.2)});
    layered("disk_ellipse", {Shape::ellipse(0.2, 0.12)});
    layered("disk_triangle", {Shape::regular_polygon(3, 0.4)});
    layered("disk_square", {Shape::square(0.4)});
    layered("disk_rectangle", {Shape::rectangle(2.0, 0.4)});

    const Point left(-0.25, 0.0), right(0.25, 0.0);
    layered("disk_two_circles", {Shape::disk(0.15, left), Shape::disk(0.15, right)});
    layered("disk_circle_ellipse", {Shape::disk(0.15, left), Shape::ellipse(0.15, 0.09, right)});
    layered("disk_two_ellipses",
            {Shape::ellipse(0.15, 0.09, left), Shape::ellipse(0.15, 0.09, right, std::numbers::pi / 2)});
    return out;
}

inline const TargetConfig& find_target(const std::vector<TargetConfig>& cat, const std::string& id) {
    for (const auto& t : cat)
        if (t.id == id) return t;
    throw ConfigError("unknown target id '" + id + "'");
}

// JSON -----------------------------------------------------------------------

inline void to_json(json& j, const Material& m) { j = json{{"sigma", m.sigma}, {"mu", m.mu}}; }
inline void from_json(const json& j, Material& m) {
    m.sigma = j.at("sigma").get<double>();
    m.mu = j.at("mu").get<double>();
}

inline void to_json(json& j, const RigidMotion& m) {
    j = json{{"z", {m.z.x(), m.z.y()}}, {"s", m.s}, {"theta", m.theta}};
}
inline void from_json(const json& j, RigidMotion& m) {
    const auto z = j.value("z", std::vector<double>{0.0, 0.0});
    if (z.size() != 2) throw ConfigError("motion.z must have two components");
    m.z = Point(z[0], z[1]);
    m.s = j.value("s", 1.0);
    m.theta = j.value("theta", 0.0);
    if (!(m.s > 0.0)) throw ConfigError("motion.s must be positive");
}

inline void to_json(json& j, const Shape& s) {
    j = json{{"kind", to_string(s.kind())}, {"placement", s.placement()}};
    switch (s.kind()) {
        case ShapeKind::Disk: j["radius"] = s.params()[0]; break;
        case ShapeKind::Ellipse:
            j["a"] = s.params()[0];
            j["b"] = s.params()[1];
            break;
        default: {
            json v = json::array();
            for (const auto& p : s.vertices()) v.push_back({p.x(), p.y()});
            j["vertices"] = v;
            j["diameter"] = s.params()[0];
            j["smoothing"] = s.params()[1];
        }
    }
}

inline Shape shape_from_json(const json& j) {
    const ShapeKind kind = shape_kind_from_string(j.at("kind").get<std::string>());
    const RigidMotion pl = j.contains("placement") ? j.at("placement").get<RigidMotion>() : RigidMotion{};
    Shape base = Shape::disk(1.0);
    switch (kind) {
        case ShapeKind::Disk: base = Shape::disk(j.at("radius").get<double>()); break;
        case ShapeKind::Ellipse: base = Shape::ellipse(j.at("a").get<double>(), j.at("b").get<double>()); break;
        default: {
            std::vector<Point> v;
            for (const auto& p : j.at("vertices")) v.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            base = Shape::rounded_polygon(std::move(v), j.at("diameter").get<double>(), {0.0, 0.0}, 0.0, kind,
                                          j.value("smoothing", kCornerSmoothing));
        }
    }
    return base.moved(pl);
}

inline void to_json(json& j, const TargetConfig& t) {
    json inc = json::array();
    for (const auto& in : t.inclusions) inc.push_back(json{{"shape", in.shape}, {"material", in.material}});
    j = json{{"id", t.id},
             {"exterior", t.exterior},
             {"background", t.background},
             {"shell", t.shell},
             {"inclusions", inc}};
}

inline TargetConfig target_from_json(const json& j) {
    TargetConfig t;
    t.id = j.value("id", std::string{});
    t.exterior = shape_from_json(j.at("exterior"));
    t.background = j.value("background", Material{});
    t.shell = j.at("shell").get<Material>();
    for (const auto& in : j.value("inclusions", json::array()))
        t.inclusions.push_back({shape_from_json(in.at("shape")), in.at("material").get<Material>()});
    t.validate();
    return t;
}

inline json catalog_to_json(const std::vector<TargetConfig>& cat) {
    json j = json::array();
    for (const auto& t : cat) j.push_back(t);
    return j;
}

inline std::vector<TargetConfig> catalog_from_json(const json& j) {
    std::vector<TargetConfig> out;
    for (const auto& t : j) out.push_back(target_from_json(t));
    return out;
}

}  // namespace scatterid
