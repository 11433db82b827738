#include "santalo/geometry.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace santalo::geometry {

HannerSpec HannerSpec::l1(HannerSpec a, HannerSpec b) {
    HannerSpec h;
    h.kind = Kind::L1Sum;
    h.children = {std::move(a), std::move(b)};
    return h;
}

HannerSpec HannerSpec::linf(HannerSpec a, HannerSpec b) {
    HannerSpec h;
    h.kind = Kind::LinfSum;
    h.children = {std::move(a), std::move(b)};
    return h;
}

int HannerSpec::dim() const {
    if (kind == Kind::Segment) return 1;
    return children.at(0).dim() + children.at(1).dim();
}

HannerSpec HannerSpec::dual() const {
    HannerSpec h;
    h.kind = kind == Kind::Segment ? Kind::Segment : (kind == Kind::L1Sum ? Kind::LinfSum : Kind::L1Sum);
    for (const auto& c : children) h.children.push_back(c.dual());
    return h;
}

namespace {

// Canonical form: flatten nested sums of the same kind and sort the operands.
std::string canonical(const HannerSpec& h) {
    if (h.kind == HannerSpec::Kind::Segment) return "I";
    std::vector<std::string> parts;
    std::vector<const HannerSpec*> stack{&h};
    while (!stack.empty()) {
        const HannerSpec* cur = stack.back();
        stack.pop_back();
        for (const auto& c : cur->children) {
            if (c.kind == h.kind) stack.push_back(&c);
            else parts.push_back(canonical(c));
        }
    }
    std::sort(parts.begin(), parts.end());
    std::string out = h.kind == HannerSpec::Kind::L1Sum ? "l1(" : "linf(";
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
    return out + ")";
}

}  // namespace

std::string HannerSpec::to_string() const { return canonical(*this); }

std::vector<Vec> hanner_vertices(const HannerSpec& spec) {
    if (spec.kind == HannerSpec::Kind::Segment) {
        Vec a(1), b(1);
        a << 1.0;
        b << -1.0;
        return {a, b};
    }
    auto va = hanner_vertices(spec.children.at(0));
    auto vb = hanner_vertices(spec.children.at(1));
    const int da = spec.children[0].dim(), db = spec.children[1].dim();
    std::vector<Vec> out;
    if (spec.kind == HannerSpec::Kind::LinfSum) {
        for (const auto& x : va)
            for (const auto& y : vb) {
                Vec v(da + db);
                v << x, y;
                out.push_back(v);
            }
    } else {
        for (const auto& x : va) {
            Vec v = Vec::Zero(da + db);
            v.head(da) = x;
            out.push_back(v);
        }
        for (const auto& y : vb) {
            Vec v = Vec::Zero(da + db);
            v.tail(db) = y;
            out.push_back(v);
        }
    }
    return out;
}

ConvexBody hanner_body(const HannerSpec& spec) { return ConvexBody::from_vertices(hanner_vertices(spec)); }

std::vector<HannerSpec> all_hanner_trees(int n) {
    std::map<int, std::vector<HannerSpec>> by_dim;
    by_dim[1] = {HannerSpec::segment()};
    for (int d = 2; d <= n; ++d) {
        std::map<std::string, HannerSpec> uniq;
        for (int a = 1; a < d; ++a)
            for (const auto& x : by_dim[a])
                for (const auto& y : by_dim[d - a])
                    for (auto h : {HannerSpec::l1(x, y), HannerSpec::linf(x, y)}) uniq.emplace(h.to_string(), h);
        for (auto& [k, v] : uniq) by_dim[d].push_back(v);
    }
    return by_dim[n];
}

}  // namespace santalo::geometry
