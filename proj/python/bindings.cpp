#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "disco/cli.hpp"
#include "disco/engine.hpp"
#include "disco/error.hpp"
#include "disco/eval.hpp"
#include "disco/json_io.hpp"
#include "disco/simweb.hpp"

namespace py = pybind11;
using namespace disco;

namespace {

using Page = std::pair<std::string, std::string>;  // (url, html)
using Ranked = std::vector<std::pair<std::string, double>>;

RankerId ranker_arg(const std::string& name) {
  const auto r = parse_ranker(name);
  if (!r) throw py::value_error("unknown ranker '" + name + "'");
  return *r;
}

Ranked to_py(const RankedList& l) {
  Ranked out;
  for (const auto& it : l.items) out.emplace_back(it.site_key, it.score);
  return out;
}

RankedList from_keys(const std::vector<std::string>& keys) {
  RankedList l;
  for (std::size_t i = 0; i < keys.size(); ++i) l.items.push_back({keys[i], static_cast<double>(i)});
  return l;
}

GroundTruth truth_of(const std::vector<std::string>& keys) {
  return GroundTruth{SiteSet(keys.begin(), keys.end())};
}

WebsiteRecord record_of(const Page& p) {
  WebsiteRecord r;
  r.best_page = parse_page(p.first, p.second);
  r.site_key = r.best_page.site_key;
  return r;
}

py::dict page_dict(const PageDoc& p) {
  py::dict d;
  d["url"] = p.url;
  d["site_key"] = p.site_key;
  d["body_tokens"] = p.body_tokens;
  d["meta_tokens"] = p.meta_tokens;
  d["outlinks"] = p.outlinks;
  return d;
}

Ranked rank_pages(const std::vector<Page>& candidates, const std::vector<Page>& seeds,
                  const std::string& ranker, const std::vector<Page>& negatives,
                  std::uint64_t seed, bool use_meta) {
  std::vector<WebsiteRecord> cands, seed_records;
  for (const auto& p : candidates) cands.push_back(record_of(p));
  for (const auto& p : seeds) seed_records.push_back(record_of(p));
  NegativePool pool;
  for (const auto& p : negatives) pool.pages.push_back(parse_page(p.first, p.second));
  RankingOptions options;
  options.ranker = ranker_arg(ranker);
  options.rng_seed = seed;
  options.use_meta = use_meta;
  return to_py(rank_websites(cands, SeedSet(std::move(seed_records)), pool, options));
}

py::dict discover_sim(const SimWeb& web, const std::string& op, const std::string& ranker,
                      std::uint64_t seed, std::size_t page_budget, std::size_t k,
                      std::size_t per_iteration) {
  EngineConfig config;
  config.seeds = seed_records(web);
  config.seed_keyword = web.seed_keyword();
  config.ranker = ranker_arg(ranker);
  config.rng_seed = seed;
  config.page_budget_total = page_budget;
  config.per_iteration_page_budget = per_iteration;
  config.k = k;
  if (op != "bandit") {
    const auto parsed = parse_operator(op);
    if (!parsed) throw py::value_error("unknown operator '" + op + "'");
    config.fixed_operator = *parsed;
  }
  SimProvider provider(web);
  Engine engine(std::move(config), provider, negative_pool(web, 200, seed));
  const DiscoveryState* state = nullptr;
  {
    py::gil_scoped_release release;
    state = &engine.run();
  }
  py::list log;
  for (const auto& e : state->log) {
    py::dict d;
    d["iteration"] = e.iteration;
    d["operator"] = std::string(to_string(e.op));
    d["new_sites"] = e.new_sites;
    d["pages_fetched"] = e.pages_fetched;
    d["reward"] = e.reward;
    d["cumulative_sites"] = e.cumulative_sites;
    log.append(d);
  }
  const auto sites = discovered_sites(*state);
  py::dict out;
  out["iterations"] = state->iteration;
  out["pages_fetched"] = state->pages_fetched_total;
  out["sites"] = std::vector<std::string>(sites.begin(), sites.end());
  out["ranked"] = to_py(state->ranked);
  out["log"] = log;
  out["stop_reason"] = state->stop_reason;
  return out;
}

}  // namespace

PYBIND11_MODULE(_disco, m) {
  m.doc() = "Website discovery: ranking, discovery operators, bandit scheduling, simulation.";

  py::register_exception<Error>(m, "DiscoError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<MetricError>(m, "MetricError", PyExc_ValueError);

  m.def("tokenize", [](const std::string& text) { return tokenize(text); });
  m.def("normalize_site_key", [](const std::string& url) { return normalize_site_key(url); });
  m.def("parse_page", [](const std::string& url, const std::string& html) {
    return page_dict(parse_page(url, html));
  });

  m.def("rank", &rank_pages, py::arg("candidates"), py::arg("seeds"),
        py::arg("ranker") = "ensemble", py::arg("negatives") = std::vector<Page>{},
        py::arg("seed") = 0, py::arg("use_meta") = true,
        "Rank (url, html) candidates against (url, html) seeds; returns (site_key, score) pairs.");
  m.def(
      "ensemble_rank",
      [](const std::vector<std::vector<std::string>>& lists) {
        std::vector<RankedList> ranked;
        for (const auto& l : lists) ranked.push_back(from_keys(l));
        return to_py(ensemble_rank(ranked));
      },
      "Fuse rankings (lists of site keys, best first) by mean position.");

  m.def("precision_at_k", [](const std::vector<std::string>& ranked,
                             const std::vector<std::string>& relevant, std::size_t k) {
    return precision_at_k(from_keys(ranked), truth_of(relevant), k);
  });
  m.def("mean_rank", [](const std::vector<std::string>& ranked,
                        const std::vector<std::string>& relevant) {
    return mean_rank(from_keys(ranked), truth_of(relevant));
  });
  m.def("median_rank", [](const std::vector<std::string>& ranked,
                          const std::vector<std::string>& relevant) {
    return median_rank(from_keys(ranked), truth_of(relevant));
  });
  m.def("harvest_rate", [](const std::vector<std::string>& discovered,
                           const std::vector<std::string>& relevant) {
    return harvest_rate(SiteSet(discovered.begin(), discovered.end()), truth_of(relevant));
  });
  m.def("coverage", [](const std::vector<std::string>& discovered,
                       const std::vector<std::string>& universe) {
    return coverage(SiteSet(discovered.begin(), discovered.end()), truth_of(universe));
  });

  m.def(
      "select_operator",
      [](const std::vector<std::tuple<double, std::uint64_t, std::uint64_t>>& arms) {
        if (arms.size() != kOperators.size()) throw py::value_error("expected four arms");
        OperatorStats s;
        for (std::size_t i = 0; i < arms.size(); ++i) {
          s.arms[i].mean_reward = std::get<0>(arms[i]);
          s.arms[i].retrieved = std::get<1>(arms[i]);
          s.arms[i].rounds = std::get<2>(arms[i]);
          s.total_retrieved += s.arms[i].retrieved;
        }
        return std::string(to_string(select_operator(s)));
      },
      "UCB1 choice from (mean_reward, retrieved, rounds) per operator, in registry order.");

  py::class_<SimWeb>(m, "SimWeb")
      .def_static(
          "generate",
          [](const std::string& spec_json) {
            SimWebSpec spec;
            from_json(json::parse(spec_json.empty() ? "{}" : spec_json), spec);
            return generate(spec);
          },
          py::arg("spec_json") = "")
      .def_static("from_json", [](const std::string& text) { return simweb_from_json(json::parse(text)); })
      .def("to_json", [](const SimWeb& w) { return simweb_to_json(w).dump(); })
      .def_property_readonly("seed_keyword", &SimWeb::seed_keyword)
      .def("seed_urls", &SimWeb::seed_urls)
      .def("coverage_universe", &SimWeb::coverage_universe)
      .def("relevant_sites",
           [](const SimWeb& w) {
             std::vector<std::string> out;
             for (const auto& p : w.pages()) {
               if (p.relevant()) out.push_back(p.site_key);
             }
             return out;
           })
      .def("__len__", [](const SimWeb& w) { return w.pages().size(); });

  m.def("discover", &discover_sim, py::arg("web"), py::arg("operator") = "bandit",
        py::arg("ranker") = "ensemble", py::arg("seed") = 0, py::arg("page_budget") = 5000,
        py::arg("k") = 20, py::arg("per_iteration") = 500,
        "Run discovery on a simulated web.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      "Run the command line in-process; returns (exit_code, stdout, stderr).");
}
