#include "parksia/network.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <queue>
#include <string>

#include "parksia/errors.hpp"

namespace parksia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int junction_ring(const GridSpec& s, int row, int col) {
    return std::min({row, col, s.rows - 1 - row, s.cols - 1 - col});
}

bool in_central_block(const GridSpec& s, const Junction& j) {
    return j.row >= 1 && j.row <= s.rows - 2 && j.col >= 1 && j.col <= s.cols - 2;
}

std::vector<double> dijkstra(const std::vector<Edge>& edges,
                             const std::vector<std::vector<int>>& out, int source) {
    std::vector<double> dist(out.size(), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist[source] = 0.0;
    open.emplace(0.0, source);
    while (!open.empty()) {
        auto [d, j] = open.top();
        open.pop();
        if (d > dist[j]) continue;
        for (int e : out[j]) {
            const Edge& edge = edges[e];
            double nd = d + edge.length;
            if (nd < dist[edge.to]) {
                dist[edge.to] = nd;
                open.emplace(nd, edge.to);
            }
        }
    }
    return dist;
}

}  // namespace

const char* to_string(Zone z) { return z == Zone::Inner ? "inner" : "outer"; }

int RoadNetwork::edge_between(int from, int to) const {
    for (int e : out_.at(static_cast<std::size_t>(from))) {
        if (edges_[e].to == to) return e;
    }
    return -1;
}

double RoadNetwork::zone_price(int edge) const { return spec_.prices.of(edges_.at(edge).zone); }

double RoadNetwork::junction_distance(int from, int to) const {
    double d = dist_.at(static_cast<std::size_t>(from) * junctions_.size() + to);
    if (d == kInf) throw InternalError("junction " + std::to_string(to) + " unreachable");
    return d;
}

double RoadNetwork::drive_distance(EdgePosition from, EdgePosition to) const {
    const Edge& a = edges_.at(from.edge);
    const Edge& b = edges_.at(to.edge);
    if (from.edge == to.edge && to.offset >= from.offset) return to.offset - from.offset;
    return (a.length - from.offset) + junction_distance(a.to, b.from) + to.offset;
}

void RoadNetwork::dump(std::ostream& os) const {
    os << "# grid " << spec_.rows << "x" << spec_.cols << " spacing " << spec_.spacing << "\n";
    os << "# edge from to from_row from_col to_row to_col length ring zone price capacity\n";
    for (const Edge& e : edges_) {
        const Junction& a = junctions_[e.from];
        const Junction& b = junctions_[e.to];
        os << e.id << ' ' << e.from << ' ' << e.to << ' ' << a.row << ' ' << a.col << ' ' << b.row
           << ' ' << b.col << ' ' << e.length << ' ' << e.ring << ' ' << to_string(e.zone) << ' '
           << zone_price(e.id) << ' ' << areas_[e.id].capacity << "\n";
    }
}

RoadNetwork build_grid(const GridSpec& spec) {
    if (spec.rows < 2 || spec.cols < 2) throw ConfigError("grid needs at least 2x2 junctions");
    if (!(spec.spacing > 0.0)) throw ConfigError("grid spacing must be positive");
    if (spec.capacity < 1) throw ConfigError("parking capacity must be at least 1");
    if (!(spec.free_flow_speed > 0.0)) throw ConfigError("free-flow speed must be positive");
    if (!(spec.prices.outer > 0.0) || !(spec.prices.inner > 0.0))
        throw ConfigError("zone prices must be positive");

    RoadNetwork net;
    net.spec_ = spec;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            net.junctions_.push_back({r * spec.cols + c, r, c, c * spec.spacing, r * spec.spacing});
        }
    }
    net.out_.assign(net.junctions_.size(), {});

    auto add_street = [&](int a, int b) {
        for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
            Edge e;
            e.id = static_cast<int>(net.edges_.size());
            e.from = from;
            e.to = to;
            e.length = spec.spacing;
            e.free_flow_speed = spec.free_flow_speed;
            const Junction& jf = net.junctions_[from];
            const Junction& jt = net.junctions_[to];
            e.ring = junction_ring(spec, jf.row, jf.col) + junction_ring(spec, jt.row, jt.col);
            e.zone = in_central_block(spec, jf) && in_central_block(spec, jt) ? Zone::Inner : Zone::Outer;
            net.out_[from].push_back(e.id);
            net.edges_.push_back(e);
        }
    };
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c + 1 < spec.cols; ++c) add_street(net.junction_at(r, c), net.junction_at(r, c + 1));
    for (int r = 0; r + 1 < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) add_street(net.junction_at(r, c), net.junction_at(r + 1, c));

    if (spec.inner_edges) {
        for (Edge& e : net.edges_) e.zone = Zone::Outer;
        for (int id : *spec.inner_edges) {
            if (id < 0 || id >= static_cast<int>(net.edges_.size()))
                throw ConfigError("inner edge id " + std::to_string(id) + " out of range");
            net.edges_[id].zone = Zone::Inner;
        }
    }

    for (const Edge& e : net.edges_) {
        ParkingArea a;
        a.id = e.id;
        a.edge = e.id;
        a.capacity = spec.capacity;
        a.first_space = e.id * spec.capacity;
        a.position = e.length / 2.0;
        a.base_price = spec.prices.of(e.zone);
        net.areas_.push_back(a);
    }
    net.num_spaces_ = static_cast<int>(net.areas_.size()) * spec.capacity;

    const std::size_t nj = net.junctions_.size();
    net.dist_.resize(nj * nj);
    for (std::size_t s = 0; s < nj; ++s) {
        auto d = dijkstra(net.edges_, net.out_, static_cast<int>(s));
        std::copy(d.begin(), d.end(), net.dist_.begin() + static_cast<std::ptrdiff_t>(s * nj));
    }
    net.next_hop_.assign(nj * nj, -1);
    for (std::size_t j = 0; j < nj; ++j) {
        for (std::size_t t = 0; t < nj; ++t) {
            if (j == t) continue;
            int best = -1;
            double best_d = kInf;
            for (int e : net.out_[j]) {  // ascending ids
                double d = net.edges_[e].length + net.dist_[net.edges_[e].to * nj + t];
                if (d < best_d - 1e-9) {
                    best_d = d;
                    best = e;
                }
            }
            net.next_hop_[j * nj + t] = best;
        }
    }

    const std::size_t na = net.areas_.size();
    net.area_dist_.resize(na * na);
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < na; ++b)
            net.area_dist_[a * na + b] =
                net.drive_distance(net.area_position(static_cast<int>(a)), net.area_position(static_cast<int>(b)));
    return net;
}

}  // namespace parksia
