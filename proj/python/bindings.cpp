#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "parksia/auction_reference.hpp"
#include "parksia/errors.hpp"
#include "parksia/experiment.hpp"

namespace py = pybind11;
using namespace parksia;

namespace {

py::dict fields_dict(const std::vector<std::pair<std::string, double>>& fields) {
    py::dict d;
    for (const auto& [name, v] : fields) d[py::str(name)] = v;
    return d;
}

ScenarioConfig config_from(const std::string& json_text) {
    ScenarioConfig c = parse_config(json_text);
    validate(c);
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Mesoscopic parking simulator with ascending-auction space assignment";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InternalError>(m, "InternalError", PyExc_RuntimeError);

    m.def(
        "resolve_config", [](const std::string& json_text) { return to_json_text(config_from(json_text)); },
        py::arg("config_json") = "{}", "Validate a JSON config and return it with every default filled in.");

    m.def(
        "run",
        [](const std::string& json_text, const std::string& out_dir) {
            ScenarioConfig c = config_from(json_text);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_scenario(c);
                if (!out_dir.empty()) write_run(r, out_dir);
            }
            return fields_dict(summary_fields(r));
        },
        py::arg("config_json") = "{}", py::arg("out_dir") = "",
        "Run one scenario. Returns the summary fields; writes the CSV outputs when out_dir is given.");

    m.def(
        "matrix",
        [](const std::string& json_text, int jobs, const std::string& out_dir) {
            ScenarioConfig base = config_from(json_text);
            MatrixSpec spec = parse_matrix_spec(json_text);
            MatrixOptions opts;
            opts.jobs = jobs;
            if (!out_dir.empty()) opts.out_dir = out_dir;
            MatrixResult res;
            {
                py::gil_scoped_release release;
                res = run_matrix(base, spec, opts);
            }
            if (!res.failures.empty()) throw std::runtime_error(res.failures.front());
            py::list rows;
            for (const MatrixRow& r : res.rows) {
                py::dict d = fields_dict(r.means);
                d["mix"] = to_string(r.cell.mix);
                d["behavior"] = to_string(r.cell.behavior);
                d["penetration"] = r.cell.penetration;
                d["runs"] = r.runs;
                rows.append(d);
            }
            return rows;
        },
        py::arg("config_json") = "{}", py::arg("jobs") = 1, py::arg("out_dir") = "",
        "Run the scenario matrix (the config's optional \"matrix\" section) and return seed-averaged rows.");

    m.def(
        "run_batch",
        [](const std::vector<double>& start_prices, const std::vector<double>& betas,
           const std::vector<double>& valuations, const std::vector<std::vector<double>>& distances,
           const std::vector<int>& order, double epsilon, const std::string& normalizer) {
            if (betas.size() != valuations.size() || betas.size() != distances.size())
                throw ConfigError("betas, valuations and distances need one entry per bidder");
            std::vector<Auction> auctions;
            for (std::size_t i = 0; i < start_prices.size(); ++i) {
                Auction a;
                a.id = a.space = a.area = static_cast<int>(i);
                a.start_price = start_prices[i];
                auctions.push_back(a);
            }
            std::vector<BidderView> views;
            for (std::size_t j = 0; j < betas.size(); ++j) {
                BidderView v;
                v.agent = static_cast<int>(j);
                v.beta = betas[j];
                v.valuation = valuations[j];
                v.distance = distances[j];
                for (double d : v.distance) v.d_max = std::max(v.d_max, d);
                views.push_back(std::move(v));
            }
            AuctionConfig cfg;
            cfg.epsilon = epsilon;
            cfg.normalizer = parse_price_normalizer(normalizer);
            std::vector<int> o = order;
            if (o.empty())
                for (std::size_t j = 0; j < views.size(); ++j) o.push_back(static_cast<int>(j));
            BatchResult r = parksia::run_batch(auctions, views, cfg, o);
            py::dict wins;
            for (const Assignment& a : r.assignments) wins[py::int_(a.agent)] = py::make_tuple(a.auction, a.price);
            return py::make_tuple(wins, r.total_bids);
        },
        py::arg("start_prices"), py::arg("betas"), py::arg("valuations"), py::arg("distances"),
        py::arg("order") = std::vector<int>{}, py::arg("epsilon") = 0.05, py::arg("normalizer") = "max_ask",
        "Run one auction batch. Returns ({bidder: (auction, price)}, accepted bids).");

    m.def(
        "oracle_check",
        [](int count, std::uint64_t seed, const std::string& normalizer) {
            AuctionConfig cfg;
            cfg.normalizer = parse_price_normalizer(normalizer);
            auto rep = reference::cross_check(count, seed, 3, 6, cfg);
            py::dict d;
            d["instances"] = rep.instances;
            d["mismatches"] = rep.mismatches;
            d["single_lot_cases"] = rep.single_lot_cases;
            d["second_price_violations"] = rep.second_price_violations;
            return d;
        },
        py::arg("count") = 1000, py::arg("seed") = 1, py::arg("normalizer") = "max_ask",
        "Cross-check the auction engine against the brute-force reference.");

    m.def(
        "population_csv",
        [](const std::string& json_text) {
            ScenarioConfig c = config_from(json_text);
            std::ostringstream os;
            write_population_csv(os, sample_population(build_grid(c.grid), c.demand));
            return os.str();
        },
        py::arg("config_json") = "{}", "Sample the driver population and return it as CSV text.");

    m.def(
        "network_dump",
        [](const std::string& json_text) {
            std::ostringstream os;
            build_grid(config_from(json_text).grid).dump(os);
            return os.str();
        },
        py::arg("config_json") = "{}", "Adjacency and zone listing of the configured grid.");
}
