#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

namespace parksia {

enum class Zone { Outer, Inner };

const char* to_string(Zone z);

struct ZonePrices {
    double outer = 0.5;
    double inner = 1.0;

    double of(Zone z) const { return z == Zone::Inner ? inner : outer; }
    double max() const { return outer > inner ? outer : inner; }
};

struct GridSpec {
    int rows = 6;
    int cols = 6;
    double spacing = 100.0;           // m
    int capacity = 15;                // spaces per area
    double free_flow_speed = 13.9;    // m/s
    ZonePrices prices;
    // Overrides the central-block rule when set.
    std::optional<std::vector<int>> inner_edges;
};

struct Junction {
    int id = 0;
    int row = 0;
    int col = 0;
    double x = 0.0;
    double y = 0.0;
};

struct Edge {
    int id = 0;
    int from = 0;
    int to = 0;
    double length = 0.0;
    double free_flow_speed = 0.0;
    int ring = 0;   // 0 on the boundary, grows toward the center
    Zone zone = Zone::Outer;
};

/// One curbside area per edge. Area ids coincide with edge ids; space ids
/// are contiguous per area starting at `first_space`.
struct ParkingArea {
    int id = 0;
    int edge = 0;
    int capacity = 0;
    int first_space = 0;
    double position = 0.0;  // m from the upstream end
    double base_price = 0.0;
};

struct EdgePosition {
    int edge = 0;
    double offset = 0.0;
};

class RoadNetwork {
public:
    const GridSpec& spec() const { return spec_; }
    int rows() const { return spec_.rows; }
    int cols() const { return spec_.cols; }
    double spacing() const { return spec_.spacing; }

    const std::vector<Junction>& junctions() const { return junctions_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<ParkingArea>& areas() const { return areas_; }
    const Edge& edge(int id) const { return edges_.at(static_cast<std::size_t>(id)); }
    const ParkingArea& area(int id) const { return areas_.at(static_cast<std::size_t>(id)); }
    const std::vector<int>& out_edges(int junction) const { return out_.at(static_cast<std::size_t>(junction)); }

    int junction_at(int row, int col) const { return row * spec_.cols + col; }
    int num_spaces() const { return num_spaces_; }
    int space_area(int space) const { return space / spec_.capacity; }
    /// Directed edge between two junctions, or -1.
    int edge_between(int from, int to) const;
    int reverse_edge(int edge) const { return edge_between(edges_.at(edge).to, edges_.at(edge).from); }

    double zone_price(int edge) const;
    EdgePosition area_position(int area) const { return {areas_[area].edge, areas_[area].position}; }
    EdgePosition edge_midpoint(int edge) const { return {edge, edges_[edge].length / 2.0}; }

    /// Shortest junction-to-junction driving distance.
    double junction_distance(int from, int to) const;
    /// Shortest directed driving distance between two on-edge positions.
    /// Going backwards on the same edge requires driving around.
    double drive_distance(EdgePosition from, EdgePosition to) const;
    /// Cached drive_distance between area positions.
    double area_distance(int from_area, int to_area) const {
        return area_dist_[static_cast<std::size_t>(from_area) * areas_.size() + to_area];
    }
    /// First edge to take at `junction` on a shortest path to `target`
    /// (ties broken by lowest edge id); -1 when already there.
    int next_edge(int junction, int target) const {
        return next_hop_[static_cast<std::size_t>(junction) * junctions_.size() + target];
    }

    void dump(std::ostream& os) const;

private:
    friend RoadNetwork build_grid(const GridSpec& spec);

    GridSpec spec_;
    std::vector<Junction> junctions_;
    std::vector<Edge> edges_;
    std::vector<ParkingArea> areas_;
    std::vector<std::vector<int>> out_;
    std::vector<double> dist_;   // junctions x junctions
    std::vector<int> next_hop_;  // junctions x junctions
    std::vector<double> area_dist_;
    int num_spaces_ = 0;
};

/// Builds a bidirectional rows x cols grid. Edges are Inner when both end
/// junctions lie in the central (rows-2) x (cols-2) block unless
/// `spec.inner_edges` lists them explicitly.
RoadNetwork build_grid(const GridSpec& spec);

}  // namespace parksia
