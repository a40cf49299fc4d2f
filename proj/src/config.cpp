#include "floq/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "floq/errors.hpp"

namespace floq {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<double> TimeGrid::materialize() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (spacing == Spacing::linear) {
    for (int i = 0; i < count; ++i)
      out.push_back(start + (stop - start) * i / (count - 1));
  } else {
    const double ratio = stop / start;
    for (int i = 0; i < count; ++i)
      out.push_back(start * std::pow(ratio, static_cast<double>(i) / (count - 1)));
  }
  return out;
}

WavePacket RunConfig::make_initial() const {
  switch (initial.kind) {
    case InitialState::Kind::delta:
      return WavePacket::delta(initial.site, initial.l1);
    case InitialState::Kind::gaussian: {
      const std::int64_t half = static_cast<std::int64_t>(std::ceil(6.0 * initial.width)) + 1;
      std::vector<std::complex<double>> amps;
      double l1 = 0.0;
      for (std::int64_t n = initial.site - half; n <= initial.site + half; ++n) {
        const double x = static_cast<double>(n - initial.site) / initial.width;
        const double mag = std::exp(-0.5 * x * x);
        amps.push_back(std::polar(mag, initial.momentum * static_cast<double>(n)));
        l1 += mag;
      }
      WavePacket w(initial.site - half, std::move(amps));
      return w.scaled(initial.l1 / l1);
    }
    case InitialState::Kind::file: {
      std::ifstream in(initial.path);
      if (!in) raise(errc::config_error, "initial.path: cannot open " + initial.path);
      json j;
      try {
        in >> j;
      } catch (const std::exception& e) {
        raise(errc::config_error, std::string("initial.path: invalid JSON: ") + e.what());
      }
      if (!j.contains("offset") || !j.contains("re"))
        raise(errc::config_error, "initial file needs offset and re fields");
      const auto re = j["re"].get<std::vector<double>>();
      std::vector<double> im(re.size(), 0.0);
      if (j.contains("im")) im = j["im"].get<std::vector<double>>();
      if (im.size() != re.size())
        raise(errc::config_error, "initial file: re and im length mismatch");
      std::vector<std::complex<double>> amps(re.size());
      for (std::size_t i = 0; i < re.size(); ++i) amps[i] = {re[i], im[i]};
      return WavePacket(j["offset"].get<std::int64_t>(), std::move(amps));
    }
  }
  raise(errc::config_error, "initial: unknown kind");
}

int RunConfig::effective_k_grid() const {
  const int p = static_cast<int>(potential.size());
  return k_grid > 0 ? k_grid : std::max(1024, 16 * p);
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& reason) {
  raise(errc::config_error, path + ": " + reason);
}

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) bad(where + "." + item.key(), "unknown key");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    bad("(root)", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("(root)", "config must be a JSON object");

  require_keys(j, "", {"potential", "lattice_radius", "boundary", "ring_cells", "times", "k_grid",
                       "sigma", "nonlinearity_sign", "initial", "tolerances", "output_dir",
                       "seed"});

  RunConfig cfg;
  cfg.digest = [&] {
    std::ostringstream os;
    os << std::hex << fnv1a(text);
    return os.str();
  }();

  if (!j.contains("potential")) bad("potential", "required");
  if (!j["potential"].is_array()) bad("potential", "must be an array of reals");
  cfg.potential = j["potential"].get<std::vector<double>>();
  if (cfg.potential.empty()) bad("potential", "empty");
  for (double v : cfg.potential)
    if (!std::isfinite(v)) bad("potential", "non-finite entry");
  const int p = static_cast<int>(cfg.potential.size());

  if (j.contains("lattice_radius")) {
    cfg.lattice_radius = j["lattice_radius"].get<int>();
    if (cfg.lattice_radius < 0) bad("lattice_radius", "must be nonnegative");
  }
  if (j.contains("boundary")) {
    const std::string b = j["boundary"].get<std::string>();
    if (b == "dirichlet")
      cfg.boundary = Boundary::dirichlet;
    else if (b == "ring")
      cfg.boundary = Boundary::ring;
    else
      bad("boundary", "must be dirichlet or ring");
  }
  if (j.contains("ring_cells")) {
    cfg.ring_cells = j["ring_cells"].get<int>();
    if (cfg.ring_cells < 0) bad("ring_cells", "must be nonnegative");
  }
  if (j.contains("times")) {
    const json& t = j["times"];
    require_keys(t, "times", {"start", "stop", "count", "spacing"});
    if (t.contains("start")) cfg.times.start = t["start"].get<double>();
    if (t.contains("stop")) cfg.times.stop = t["stop"].get<double>();
    if (t.contains("count")) cfg.times.count = t["count"].get<int>();
    if (t.contains("spacing")) {
      const std::string s = t["spacing"].get<std::string>();
      if (s == "linear")
        cfg.times.spacing = TimeGrid::Spacing::linear;
      else if (s == "log")
        cfg.times.spacing = TimeGrid::Spacing::log;
      else
        bad("times.spacing", "must be linear or log");
    }
    if (cfg.times.count < 2) bad("times.count", "must be >= 2");
    if (cfg.times.stop < cfg.times.start) bad("times.stop", "must be >= times.start");
    if (cfg.times.spacing == TimeGrid::Spacing::log && cfg.times.start <= 0.0)
      bad("times.start", "must be > 0 for log spacing");
  }
  if (j.contains("k_grid")) {
    cfg.k_grid = j["k_grid"].get<int>();
    if (cfg.k_grid != 0 && cfg.k_grid < 16 * p) bad("k_grid", "must be >= 16*p");
  }
  if (j.contains("sigma")) {
    cfg.sigma = j["sigma"].get<double>();
    if (!(cfg.sigma > 1.0)) bad("sigma", "must be > 1");
  }
  if (j.contains("nonlinearity_sign")) {
    const std::string s = j["nonlinearity_sign"].get<std::string>();
    if (s == "defocusing")
      cfg.nonlinearity_sign = +1;
    else if (s == "focusing")
      cfg.nonlinearity_sign = -1;
    else
      bad("nonlinearity_sign", "must be focusing or defocusing");
  }
  if (j.contains("initial")) {
    const json& ini = j["initial"];
    require_keys(ini, "initial", {"type", "site", "width", "momentum", "l1", "path"});
    const std::string type = ini.value("type", "delta");
    if (type == "delta")
      cfg.initial.kind = InitialState::Kind::delta;
    else if (type == "gaussian")
      cfg.initial.kind = InitialState::Kind::gaussian;
    else if (type == "file")
      cfg.initial.kind = InitialState::Kind::file;
    else
      bad("initial.type", "must be delta, gaussian, or file");
    if (ini.contains("site")) cfg.initial.site = ini["site"].get<std::int64_t>();
    if (ini.contains("width")) {
      cfg.initial.width = ini["width"].get<double>();
      if (!(cfg.initial.width > 0.0)) bad("initial.width", "must be > 0");
    }
    if (ini.contains("momentum")) cfg.initial.momentum = ini["momentum"].get<double>();
    if (ini.contains("l1")) {
      cfg.initial.l1 = ini["l1"].get<double>();
      if (!(cfg.initial.l1 > 0.0)) bad("initial.l1", "must be > 0");
    }
    if (ini.contains("path")) cfg.initial.path = ini["path"].get<std::string>();
    if (cfg.initial.kind == InitialState::Kind::file && cfg.initial.path.empty())
      bad("initial.path", "required for file initial state");
  }
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) bad("tolerances", "must be an object");
    for (const auto& item : j["tolerances"].items()) {
      if (!item.value().is_number()) bad("tolerances." + item.key(), "must be a number");
      cfg.tolerances[item.key()] = item.value().get<double>();
    }
  }
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::config_error, "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace floq
