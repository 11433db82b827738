// Python bindings for the santalo_lab core. Vectors and matrices travel as
// numpy arrays; ledgers and harness reports as plain Python objects.

#include "santalo/geometry.hpp"
#include "santalo/harness.hpp"
#include "santalo/linearize.hpp"
#include "santalo/santalo.hpp"
#include "santalo/sconcave.hpp"
#include "santalo/sphere.hpp"
#include "santalo/transport.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace santalo;
using geometry::ConvexBody;
using measures::WeightFunction;

namespace {

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<Vec> rows_of(const Mat& m) {
    std::vector<Vec> out;
    out.reserve(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
    return out;
}

Mat stack(const std::vector<Vec>& v) {
    Mat m(v.size(), v.empty() ? 0 : v.front().size());
    for (std::size_t i = 0; i < v.size(); ++i) m.row(i) = v[i].transpose();
    return m;
}

transport::CostMatrix cost_of(const Mat& c) {
    transport::CostMatrix cm{c, "python"};
    cm.validate();
    return cm;
}

py::dict plan_dict(const transport::TransportPlan& plan) {
    py::dict d;
    d["objective"] = plan.objective;
    d["plan"] = plan.dense();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Volume-product and transport-entropy inequality checks";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    py::enum_<Verdict>(m, "Verdict")
        .value("Holds", Verdict::Holds)
        .value("Equality", Verdict::Equality)
        .value("Violated", Verdict::Violated)
        .value("Skipped", Verdict::Skipped);

    py::class_<Ledger>(m, "Ledger")
        .def_readonly("name", &Ledger::name)
        .def_readonly("lhs", &Ledger::lhs)
        .def_readonly("rhs", &Ledger::rhs)
        .def_readonly("gap", &Ledger::gap)
        .def_readonly("tol", &Ledger::tol)
        .def_readonly("verdict", &Ledger::verdict)
        .def_readonly("provenance", &Ledger::provenance)
        .def_readonly("note", &Ledger::note)
        .def("to_dict", [](const Ledger& l) { return to_python(to_json(l)); })
        .def("__repr__", [](const Ledger& l) {
            return "<Ledger " + l.name + " " + to_string(l.verdict) + " gap=" + format_double(l.gap) + ">";
        });
    m.def("make_ledger", &make_ledger, py::arg("name"), py::arg("lhs"), py::arg("rhs"), py::arg("tol"),
          py::arg("provenance"), py::arg("note") = "");

    // geometry
    py::class_<ConvexBody>(m, "ConvexBody")
        .def_static("from_vertices", [](const Mat& v) { return ConvexBody::from_vertices(rows_of(v)); },
                    py::arg("vertices"), "convex hull of the rows")
        .def_static("ball", &ConvexBody::ball, py::arg("dim"), py::arg("radius") = 1.0)
        .def_static("ellipsoid", &ConvexBody::ellipsoid, py::arg("matrix"), "{x : x.Ax <= 1}")
        .def_static("cube", &ConvexBody::cube, py::arg("dim"), py::arg("half_width") = 1.0)
        .def_static("cross_polytope", &ConvexBody::cross_polytope, py::arg("dim"), py::arg("radius") = 1.0)
        .def_property_readonly("dim", &ConvexBody::dim)
        .def_property_readonly("volume", &ConvexBody::volume)
        .def_property_readonly("barycenter", &ConvexBody::barycenter)
        .def_property_readonly("is_polytope", &ConvexBody::is_polytope)
        .def_property_readonly("vertices",
                               [](const ConvexBody& b) -> py::object {
                                   if (!b.is_polytope()) return py::none();
                                   return py::cast(stack(b.polytope().vertices));
                               })
        .def("polar", [](const ConvexBody& b) { return geometry::polar(b); })
        .def("support", [](const ConvexBody& b, const Vec& y) { return geometry::support_function(b, y); })
        .def("radial", [](const ConvexBody& b, const Vec& u) { return geometry::radial_function(b, u); })
        .def("translate", [](const ConvexBody& b, const Vec& a) { return geometry::translate(b, a); })
        .def("is_symmetric", [](const ConvexBody& b) { return geometry::is_symmetric(b); })
        .def("is_unconditional", [](const ConvexBody& b) { return geometry::is_unconditional(b); })
        .def("to_dict", [](const ConvexBody& b) { return to_python(geometry::to_json(b)); });

    m.def("exact_volume_product", [](const Mat& vertices) {
        const auto r = geometry::exact_volume_product(int(vertices.cols()), rows_of(vertices));
        return py::make_tuple(r.numerator, r.denominator, r.value);
    }, py::arg("vertices"), "(numerator, denominator, value) of |P| |P°| in exact rationals");

    // santalo
    m.def("santalo_functional", &santalo_functional, py::arg("body"), py::arg("z"), "|(K - z)°|");
    m.def("santalo_point", [](const ConvexBody& K, double tol, int max_iter) {
        const auto r = santalo_point(K, tol, max_iter);
        return py::make_tuple(r.point, r.polar_volume);
    }, py::arg("body"), py::arg("tol") = 1e-8, py::arg("max_iter") = 100);
    m.def("volume_product", [](const ConvexBody& K, bool at_origin) {
        return volume_product(K, at_origin ? VolumeProductMode::AtOrigin : VolumeProductMode::AtSantalo);
    }, py::arg("body"), py::arg("at_origin") = false);
    m.def("bs_check", &bs_check, py::arg("body"));

    // sconcave
    m.def("cs_constant", [](double s, int n) { return sconcave::cs_constant({s}, n); }, py::arg("s"), py::arg("n"));
    m.def("hanner_bound", [](double s, int n) { return sconcave::hanner_bound({s}, n); }, py::arg("s"), py::arg("n"));
    m.def("s_power", &sconcave::s_power, py::arg("s"), py::arg("t"));
    m.def("ps_functional", [](const std::function<double(double)>& g, double s, double a, double b, int nodes) {
        const auto f = sconcave::GridFunction::sample(sconcave::GridSpec::line(a, b, nodes),
                                                      [&](const Vec& x) { return g(x[0]); });
        const auto r = sconcave::ps_functional(f, {s});
        return py::make_tuple(r.value, r.ledger);
    }, py::arg("g"), py::arg("s"), py::arg("lo"), py::arg("hi"), py::arg("nodes"),
          "P_s of a 1D function sampled on [lo, hi]; returns (value, ledger)");

    // measures
    py::class_<WeightFunction>(m, "WeightFunction")
        .def_static("gaussian", &WeightFunction::gaussian)
        .def_static("barenblatt", &WeightFunction::barenblatt, py::arg("s"))
        .def_static("cauchy", &WeightFunction::cauchy, py::arg("beta"))
        .def_static("custom", &WeightFunction::custom, py::arg("t"), py::arg("rho"))
        .def_property_readonly("name", &WeightFunction::name)
        .def("__call__", &WeightFunction::operator())
        .def("log_rho", &WeightFunction::log_rho)
        .def("normalization", &WeightFunction::normalization, py::arg("n"))
        .def("support_radius", &WeightFunction::support_radius);
    m.def("relative_entropy",
          py::overload_cast<const std::vector<double>&, const std::vector<double>&>(&measures::relative_entropy),
          py::arg("p"), py::arg("q"));
    m.def("total_variation", &measures::total_variation, py::arg("p"), py::arg("q"));

    // transport
    m.def("omega", [](const WeightFunction& w, const Vec& x, const Vec& y, bool restricted) {
        return transport::omega(w, x, y,
                                restricted ? transport::OmegaVariant::Restricted : transport::OmegaVariant::Unrestricted);
    }, py::arg("weight"), py::arg("x"), py::arg("y"), py::arg("restricted") = true);
    m.def("k_s", &transport::k_s, py::arg("s"), py::arg("x"), py::arg("y"));
    m.def("alpha", &transport::alpha, py::arg("u"), py::arg("v"), py::arg("margin") = 0.0);
    m.def("solve_exact", [](const Mat& c, const std::vector<double>& p, const std::vector<double>& q) {
        const auto r = transport::solve_exact(cost_of(c), p, q);
        auto d = plan_dict(r.plan);
        d["feasible"] = r.status == transport::SolveStatus::Optimal;
        d["phi"] = r.duals.phi;
        d["psi"] = r.duals.psi;
        return d;
    }, py::arg("cost"), py::arg("p"), py::arg("q"), "network simplex; +inf entries are forbidden");
    m.def("solve_sinkhorn", [](const Mat& c, const std::vector<double>& p, const std::vector<double>& q, double eps) {
        transport::SinkhornOptions opt;
        opt.epsilon = eps;
        const auto r = transport::solve_sinkhorn(cost_of(c), p, q, opt);
        auto d = plan_dict(r.plan);
        d["residual"] = r.residual;
        return d;
    }, py::arg("cost"), py::arg("p"), py::arg("q"), py::arg("epsilon") = 1e-3);

    // sphere
    m.def("sphere_grid", [](int n, int resolution) {
        const auto g = n == 1 ? sphere::SphereGrid::circle(resolution) : sphere::SphereGrid::icosahedral(resolution);
        return py::make_tuple(stack(g.nodes), g.weights);
    }, py::arg("n"), py::arg("resolution"), "(nodes, weights): circle(half_count) for n = 1, icosahedral(level) for n = 2");
    m.def("cone_measure", [](const ConvexBody& C, bool auto_rescale) {
        const auto cm = sphere::cone_measure(C, auto_rescale);
        return py::make_tuple(stack(cm.normals), cm.masses);
    }, py::arg("body"), py::arg("auto_rescale") = false);
    m.def("improved_mahler_check", &sphere::improved_mahler_check, py::arg("body"), py::arg("tol") = 1e-6);

    // linearize
    m.def("h_rho_matrix", [](const WeightFunction& w, const Vec& y) { return linearize::h_rho_matrix(w, y).H; },
          py::arg("weight"), py::arg("y"));
    m.def("taylor_check", [](const WeightFunction& w, const Vec& y, const std::vector<double>& radii) {
        const auto r = linearize::taylor_check(w, y, radii);
        py::dict d;
        d["residual"] = r.residual;
        d["order"] = r.order;
        d["monotone"] = r.monotone;
        return d;
    }, py::arg("weight"), py::arg("y"), py::arg("radii"));

    // harness
    m.def("experiment_kinds", [] {
        std::vector<std::string> names;
        for (const auto& k : harness::registry()) names.push_back(k.name);
        return names;
    });
    m.def("suite_names", &harness::suite_names);
    m.def("run_config", [](const std::string& text, int jobs, std::optional<std::uint64_t> seed) {
        harness::RunReport report;
        {
            py::gil_scoped_release release;
            report = harness::run(harness::parse_config(text), {jobs, seed});
        }
        return py::make_tuple(to_python(report.to_json()), report.ledgers(), harness::exit_code(report));
    }, py::arg("config"), py::arg("jobs") = 1, py::arg("seed") = py::none(),
          "run a JSON config; returns (report, ledgers, exit code)");
    m.def("run_suite", [](const std::string& name, int jobs, std::optional<std::uint64_t> seed) {
        harness::RunReport report;
        {
            py::gil_scoped_release release;
            report = harness::run(harness::suite(name), {jobs, seed});
        }
        return py::make_tuple(to_python(report.to_json()), report.ledgers(), harness::exit_code(report));
    }, py::arg("name"), py::arg("jobs") = 1, py::arg("seed") = py::none());

    m.attr("__version__") = SANTALO_LAB_VERSION;
}
