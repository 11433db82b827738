#pragma once

#include "santalo/common.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <variant>
#include <vector>

namespace santalo::geometry {

struct Halfspace {
    Vec normal;
    double offset = 0.0;  // normal . x <= offset
};

struct HPolytope {
    int dim = 0;
    std::vector<Halfspace> halfspaces;
};

struct VPolytope {
    int dim = 0;
    std::vector<Vec> vertices;
};

struct Ball {
    int dim = 0;
    double radius = 1.0;
};

// {x : x^T M x <= 1}. The polar is {y : y^T M^{-1} y <= 1}.
struct Ellipsoid {
    Mat matrix;
};

// Both representations of a full-dimensional polytope. Facet normals are unit
// vectors; simplices triangulate the polytope (indices into vertices).
struct PolytopeData {
    int dim = 0;
    std::vector<Vec> vertices;
    std::vector<Halfspace> facets;
    std::vector<std::vector<int>> facet_vertices;
    std::vector<std::vector<int>> simplices;
    double volume = 0.0;
    Vec barycenter;
    bool used_exact = false;
};

PolytopeData polytope_from_vertices(int dim, const std::vector<Vec>& points, bool force_exact = false);
PolytopeData polytope_from_halfspaces(int dim, const std::vector<Halfspace>& halfspaces,
                                      bool force_exact = false);

// Facet area ((dim-1)-volume) of every facet, in facet order.
std::vector<double> facet_areas(const PolytopeData& p);

class ConvexBody {
public:
    using Shape = std::variant<HPolytope, VPolytope, Ball, Ellipsoid>;

    explicit ConvexBody(Shape shape);

    static ConvexBody from_vertices(std::vector<Vec> vertices);
    static ConvexBody from_halfspaces(std::vector<Halfspace> halfspaces);
    static ConvexBody ball(int dim, double radius = 1.0);
    static ConvexBody ellipsoid(Mat matrix);
    static ConvexBody cube(int dim, double half_width = 1.0);
    static ConvexBody cross_polytope(int dim, double radius = 1.0);

    int dim() const { return dim_; }
    const Shape& shape() const { return shape_; }
    bool is_polytope() const { return poly_ != nullptr; }
    const PolytopeData& polytope() const;

    double volume() const { return volume_; }
    const Vec& barycenter() const { return barycenter_; }

private:
    ConvexBody(Shape shape, std::shared_ptr<const PolytopeData> poly);
    void init_smooth();

    Shape shape_;
    int dim_ = 0;
    std::shared_ptr<const PolytopeData> poly_;
    double volume_ = 0.0;
    Vec barycenter_;

    friend ConvexBody polar(const ConvexBody& body);
};

double support_function(const ConvexBody& body, const Vec& y);
double radial_function(const ConvexBody& body, const Vec& u);
ConvexBody polar(const ConvexBody& body);
double volume(const ConvexBody& body);
Vec barycenter(const ConvexBody& body);
bool is_unconditional(const ConvexBody& body, double tol = 1e-9);
bool is_symmetric(const ConvexBody& body, double tol = 1e-9);
bool contains_origin_interior(const ConvexBody& body, double margin = 0.0);

ConvexBody translate(const ConvexBody& body, const Vec& a);
ConvexBody scale(const ConvexBody& body, double factor);
// Rescale so that |K| = 1.
ConvexBody normalize_volume(const ConvexBody& body);

// Hanner tree: leaves are segments [-1,1]; internal nodes are l1 or linf sums.
struct HannerSpec {
    enum class Kind { Segment, L1Sum, LinfSum };
    Kind kind = Kind::Segment;
    std::vector<HannerSpec> children;  // exactly two for sums

    static HannerSpec segment() { return {}; }
    static HannerSpec l1(HannerSpec a, HannerSpec b);
    static HannerSpec linf(HannerSpec a, HannerSpec b);

    int dim() const;
    HannerSpec dual() const;  // tags swapped
    std::string to_string() const;
};

// Vertex list of the realization, with integer coordinates in {-1,0,1}.
std::vector<Vec> hanner_vertices(const HannerSpec& spec);
ConvexBody hanner_body(const HannerSpec& spec);
// All Hanner trees of dimension n, up to commutativity/associativity of each sum.
std::vector<HannerSpec> all_hanner_trees(int n);

// Exact rational evaluation of |K| |K°| for the polytope conv(vertices),
// returned as numerator/denominator strings plus the double value.
struct ExactVolumeProduct {
    std::string numerator;
    std::string denominator;
    double value = 0.0;
    bool equals(long long num, long long den) const;
};
ExactVolumeProduct exact_volume_product(int dim, const std::vector<Vec>& vertices);

nlohmann::json to_json(const ConvexBody& body);
ConvexBody body_from_json(const nlohmann::json& j);

}  // namespace santalo::geometry
