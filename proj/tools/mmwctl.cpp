// mmwctl: validate, launch, and query mask-mediator-wrapper topologies, plus
// the shift-cost analyzer.
//
// Exit codes: 0 ok, 1 validation failure, 2 runtime failure.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmw/cost/cost.hpp"
#include "mmw/mask/http_kind.hpp"
#include "mmw/mask/tabular_kind.hpp"
#include "mmw/topology/launch.hpp"
#include "mmw/topology/shift.hpp"
#include "mmw/topology/topology.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

volatile std::sig_atomic_t g_stop = 0;

json load_json_arg(const std::string& arg) {
  // A leading '@' or an existing file path reads from disk; otherwise the
  // argument itself is parsed as JSON.
  std::string text = arg;
  std::string path = arg.rfind('@', 0) == 0 ? arg.substr(1) : arg;
  if (std::ifstream in(path); in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  return json::parse(text);
}

mmw::CostParams params_from_json(const json& j) {
  mmw::CostParams p;
  auto get = [&](const char* key, mmw::Rational& slot) {
    if (!j.contains(key)) return;
    if (j[key].is_string())
      slot = mmw::Rational::parse(j[key].get<std::string>());
    else if (j[key].is_number_integer())
      slot = mmw::Rational(j[key].get<long long>());
    else
      slot = mmw::Rational::parse(j[key].dump());
  };
  get("Me_impl", p.me_impl);
  get("MeP_impl", p.mep_impl);
  get("Ma_impl", p.ma_impl);
  get("Me_depl", p.me_depl);
  get("MeP_depl", p.mep_depl);
  get("Ma_depl", p.ma_depl);
  get("W_depl", p.w_depl);
  get("Conn_set", p.conn_set);
  return p;
}

std::vector<long long> parse_n_arg(const std::string& arg) {
  auto dots = arg.find("..");
  if (dots == std::string::npos) return {std::stoll(arg)};
  long long lo = std::stoll(arg.substr(0, dots));
  long long hi = std::stoll(arg.substr(dots + 2));
  std::vector<long long> out;
  for (long long n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

int cmd_validate(const std::string& file) {
  mmw::Topology t = mmw::parse_topology_file(file);
  std::vector<mmw::TopologyViolation> report = mmw::validate_topology(t);
  if (report.empty()) {
    std::cout << "ok: " << t.components.size() << " components, " << t.sources.size()
              << " sources, " << t.edges.size() << " edges" << std::endl;
    return kExitOk;
  }
  for (const auto& v : report) std::cout << v.rule << ": " << v.detail << std::endl;
  return kExitValidation;
}

int cmd_serve(const std::string& file, bool multi_process, int base_port,
              const std::string& self_exe) {
  mmw::Topology t = mmw::parse_topology_file(file);
  std::vector<mmw::TopologyViolation> report = mmw::validate_topology(t);
  if (!report.empty()) {
    for (const auto& v : report) std::cerr << v.rule << ": " << v.detail << std::endl;
    return kExitValidation;
  }
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  if (multi_process) {
    mmw::MultiProcSystem sys = mmw::launch_multi_process(t, file, self_exe, base_port);
    for (const auto& c : t.components)
      std::cout << c.id << " (" << to_string(c.kind) << ") on port " << sys.port_of(c.id)
                << std::endl;
    std::cout << "serving; Ctrl-C to stop" << std::endl;
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    sys.shutdown();
  } else {
    mmw::InProcSystem sys = mmw::launch_in_process(t);
    for (const auto& id : sys.mask_ids()) std::cout << "mask " << id << " ready" << std::endl;
    std::cout << "serving in-process; Ctrl-C to stop" << std::endl;
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    sys.shutdown();
  }
  return kExitOk;
}

mmw::MaskedBlob blob_for(const mmw::Topology& t, const std::string& mask_id,
                         const std::string& masked_query) {
  const mmw::ComponentDecl* c = t.find_component(mask_id);
  std::string kind =
      c ? c->config.value("kind", std::string(mmw::kTabularMaskKind)) : mmw::kTabularMaskKind;
  if (kind == mmw::kHttpMaskKind) return mmw::http_masked_query(masked_query);
  return {mmw::kTabularMaskKind, "text/plain", masked_query};
}

int cmd_schema(const std::string& file, const std::string& mask_id) {
  mmw::Topology t = mmw::parse_topology_file(file);
  mmw::InProcSystem sys = mmw::launch_in_process(t);
  std::cout << sys.mask(mask_id).get_masked_schema().bytes << std::endl;
  return kExitOk;
}

int cmd_query(const std::string& file, const std::string& mask_id,
              const std::string& masked_query) {
  mmw::Topology t = mmw::parse_topology_file(file);
  mmw::InProcSystem sys = mmw::launch_in_process(t);
  std::cout << sys.mask(mask_id).run(blob_for(t, mask_id, masked_query)).bytes << std::endl;
  return kExitOk;
}

int cmd_shift(const std::string& file, const std::string& shift_arg) {
  mmw::Topology t = mmw::parse_topology_file(file);
  json spec_json = load_json_arg(shift_arg);
  mmw::ShiftSpec spec;
  auto kind = mmw::parse_shift_kind(spec_json.value("kind", std::string()));
  if (!kind) {
    std::cerr << "shift spec needs \"kind\": add-representation-type | add-representation | "
                 "add-mediation | add-wrapper"
              << std::endl;
    return kExitValidation;
  }
  spec.kind = *kind;
  spec.target = spec_json.value("target", std::string());
  spec.new_id = spec_json.value("new_id", std::string());
  spec.source_id = spec_json.value("source_id", std::string());
  if (spec_json.contains("over"))
    for (const auto& id : spec_json["over"]) spec.over.push_back(id.get<std::string>());
  if (spec_json.contains("config")) spec.config = spec_json["config"];

  mmw::ShiftResult result = mmw::apply_shift(t, spec);
  mmw::ShiftCost cost = mmw::price_editlog(result.log, mmw::CostParams{});
  json out{{"topology", mmw::topology_to_json(result.topology)},
           {"editlog", json::array()},
           {"cost", {{"symbolic", cost.symbolic.to_string()},
                     {"numeric", cost.numeric.to_string()},
                     {"params", "default sample set (not paper data)"}}}};
  for (const auto& a : result.log.actions)
    out["editlog"].push_back({{"action", to_string(a.act)},
                              {"class", to_string(a.comp)},
                              {"component", a.component_id},
                              {"detail", a.detail}});
  std::cout << out.dump(2) << std::endl;
  return kExitOk;
}

int cmd_cost(const std::string& params_arg, const std::string& scenario_arg,
             const std::string& arch_arg, const std::string& n_arg, const std::string& format) {
  mmw::CostParams p;
  if (!params_arg.empty()) p = params_from_json(load_json_arg(params_arg));
  std::vector<mmw::ParamViolation> bad = mmw::validate_params(p);
  if (!bad.empty()) {
    for (const auto& v : bad) std::cerr << v.code << ": " << v.detail << std::endl;
    return kExitValidation;
  }

  std::vector<int> scenarios;
  if (scenario_arg == "all")
    scenarios = {1, 2, 3, 4};
  else
    scenarios = {std::stoi(scenario_arg)};
  std::vector<mmw::Architecture> arches;
  if (arch_arg == "all") {
    arches = {mmw::Architecture::OneLMW, mmw::Architecture::TwoLMW, mmw::Architecture::MMW};
  } else {
    auto a = mmw::parse_architecture(arch_arg);
    if (!a) {
      std::cerr << "unknown architecture '" << arch_arg << "'" << std::endl;
      return kExitValidation;
    }
    arches = {*a};
  }

  json out = json::array();
  for (long long n : parse_n_arg(n_arg)) {
    if (format == "json") {
      json grid{{"n", n}, {"cells", json::array()}, {"overhead", json::array()}};
      for (int s : scenarios)
        for (auto a : arches) {
          mmw::ShiftCost c = mmw::scenario_cost(s, a, n, p);
          grid["cells"].push_back({{"scenario", s},
                                   {"arch", to_string(a)},
                                   {"symbolic", c.symbolic.to_string()},
                                   {"numeric", c.numeric.to_string()}});
        }
      for (auto a : {mmw::Architecture::TwoLMW, mmw::Architecture::MMW}) {
        mmw::ShiftCost c = mmw::overhead_cost(a, n, p);
        grid["overhead"].push_back({{"arch", to_string(a)},
                                    {"symbolic", c.symbolic.to_string()},
                                    {"numeric", c.numeric.to_string()}});
      }
      out.push_back(grid);
      continue;
    }
    std::cout << "N = " << n << "  (params: default sample set unless --params given; "
              << "not paper data)" << std::endl;
    for (int s : scenarios) {
      std::cout << "  Scenario " << s << ":" << std::endl;
      std::vector<std::pair<mmw::Architecture, mmw::ShiftCost>> row;
      for (auto a : arches) row.emplace_back(a, mmw::scenario_cost(s, a, n, p));
      for (const auto& [a, c] : row)
        std::cout << "    " << std::left << std::setw(5) << to_string(a) << " "
                  << std::setw(42) << c.symbolic.to_string() << " = " << c.numeric.to_string()
                  << std::endl;
      if (row.size() == 3) {
        // Per-row ordering annotation (MMW vs 2LMW vs 1LMW numerics).
        const mmw::Rational one = row[0].second.numeric;
        const mmw::Rational two = row[1].second.numeric;
        const mmw::Rational mmw_cost = row[2].second.numeric;
        std::ostringstream note;
        if (mmw_cost < two && two <= one)
          note << "MMW " << (two == one ? "< 2LMW = 1LMW" : "< 2LMW < 1LMW");
        else if (mmw_cost == two && two == one)
          note << "all equal";
        else
          note << "no uniform ordering";
        std::cout << "    ordering: " << note.str() << std::endl;
      }
    }
    std::cout << "  Overhead:" << std::endl;
    for (auto a : {mmw::Architecture::TwoLMW, mmw::Architecture::MMW}) {
      mmw::ShiftCost c = mmw::overhead_cost(a, n, p);
      std::cout << "    " << std::left << std::setw(5) << to_string(a) << " " << std::setw(42)
                << c.symbolic.to_string() << " = " << c.numeric.to_string() << std::endl;
    }
  }
  if (format == "json") std::cout << out.dump(2) << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mask-mediator-wrapper topology and cost tool"};
  app.require_subcommand(1);

  std::string file, mask_id, masked_query, shift_arg;
  std::string params_arg, scenario_arg = "all", arch_arg = "all", n_arg = "3",
              format = "table";
  bool multi_process = false;
  int base_port = 7400;

  auto* validate = app.add_subcommand("validate", "check a topology file against the rules");
  validate->add_option("file", file)->required();

  auto* serve = app.add_subcommand("serve", "launch a topology and serve until interrupted");
  serve->add_option("file", file)->required();
  serve->add_flag("--multi-process", multi_process, "one process per component over TCP");
  serve->add_option("--base-port", base_port, "first port for multi-process mode");

  auto* runc = app.add_subcommand("run-component", "run one component of a topology (internal)");
  runc->add_option("file", file)->required();
  runc->add_option("id", mask_id)->required();
  runc->add_option("--base-port", base_port)->required();

  auto* schema = app.add_subcommand("schema", "print a mask's exported schema");
  schema->add_option("mask-id", mask_id)->required();
  schema->add_option("--file", file, "topology file to launch in-process")->required();

  auto* query = app.add_subcommand("query", "run a masked query through a mask");
  query->add_option("mask-id", mask_id)->required();
  query->add_option("masked-query", masked_query)->required();
  query->add_option("--file", file, "topology file to launch in-process")->required();

  auto* shift = app.add_subcommand("shift", "apply an evolution scenario to a topology");
  shift->add_option("file", file)->required();
  shift->add_option("shift-spec", shift_arg, "JSON spec or @file")->required();

  auto* cost = app.add_subcommand("cost", "shift-cost table for the four scenarios");
  cost->add_option("--params", params_arg, "CostParams as JSON or @file");
  cost->add_option("--scenario", scenario_arg, "1|2|3|4|all");
  cost->add_option("--arch", arch_arg, "1LMW|2LMW|MMW|all");
  cost->add_option("--n", n_arg, "wrapper count, int or lo..hi range");
  cost->add_option("--format", format, "table|json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(file);
    if (serve->parsed()) {
      std::error_code ec;
      std::string self = std::filesystem::read_symlink("/proc/self/exe", ec).string();
      return cmd_serve(file, multi_process, base_port, ec ? std::string(argv[0]) : self);
    }
    if (runc->parsed()) {
      mmw::run_component(mmw::parse_topology_file(file), mask_id, base_port);
      return kExitOk;
    }
    if (schema->parsed()) return cmd_schema(file, mask_id);
    if (query->parsed()) return cmd_query(file, mask_id, masked_query);
    if (shift->parsed()) return cmd_shift(file, shift_arg);
    if (cost->parsed()) return cmd_cost(params_arg, scenario_arg, arch_arg, n_arg, format);
  } catch (const mmw::StageError& e) {
    std::cerr << "error [" << e.code() << " @ " << e.stage() << "]: " << e.detail() << std::endl;
    return kExitRuntime;
  } catch (const mmw::Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.detail() << std::endl;
    return e.code() == "parse-error" || e.code() == "invalid-topology" ||
                   e.code() == "invalid-shift-target" || e.code() == "malformed-rational"
               ? kExitValidation
               : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitRuntime;
  }
  return kExitOk;
}
