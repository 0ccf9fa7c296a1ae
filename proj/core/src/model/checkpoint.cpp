#include "dgc/model/checkpoint.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "dgc/error.hpp"
#include "dgc/tensor/serialize.hpp"

namespace dgc::model {

namespace {

constexpr const char* kFormat = "dgc-checkpoint-1";

Tensor vec_tensor(const std::vector<float>& v) {
  return Tensor::from_data({static_cast<std::int64_t>(v.size())}, v);
}

std::vector<float> tensor_vec(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelState& state, const Adam& opt,
                     int epochs_done) {
  std::vector<std::pair<std::string, Tensor>> records;
  for (const auto& n : state.param_names()) records.emplace_back("param." + n, state.param(n));
  for (const auto& n : state.batchnorm_names()) {
    const auto& s = state.stats(n);
    records.emplace_back("bn_mean." + n, vec_tensor(s.running_mean));
    records.emplace_back("bn_var." + n, vec_tensor(s.running_var));
  }
  for (const auto& [n, m] : opt.first_moments()) records.emplace_back("adam_m." + n, vec_tensor(m));
  for (const auto& [n, v] : opt.second_moments()) {
    records.emplace_back("adam_v." + n, vec_tensor(v));
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write checkpoint " + path.string());
  os << "format=" << kFormat << '\n';
  for (const auto& [k, v] : state.config().to_key_values()) os << k << '=' << v << '\n';
  const auto& a = opt.config();
  os << std::setprecision(17);
  os << "adam_lr=" << a.lr << "\nadam_beta1=" << a.beta1 << "\nadam_beta2=" << a.beta2
     << "\nadam_eps=" << a.eps << "\nadam_steps=" << opt.steps() << "\nepochs_done=" << epochs_done
     << '\n';
  for (const auto& r : records) os << "tensor=" << r.first << '\n';
  os << "---\n";
  for (const auto& r : records) write_tensor(os, r.second);
  if (!os) throw DataError("cannot write checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("missing checkpoint " + path.string());
  std::map<std::string, std::string> kv;
  std::vector<std::string> names;
  std::string line;
  bool separator = false;
  while (std::getline(is, line)) {
    if (line == "---") {
      separator = true;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("checkpoint: malformed header line");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "tensor") {
      names.push_back(value);
    } else {
      kv[key] = value;
    }
  }
  if (!separator || kv["format"] != kFormat) throw DataError("checkpoint: bad header");

  auto number = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw DataError(std::string("checkpoint: missing ") + key);
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw DataError(std::string("checkpoint: bad value for ") + key);
    }
  };

  const PyramidConfig cfg = PyramidConfig::from_key_values(kv);
  Checkpoint ck{init_state(cfg, 0), Adam({number("adam_lr"), number("adam_beta1"),
                                          number("adam_beta2"), number("adam_eps")}),
                static_cast<int>(number("epochs_done"))};
  ck.optimizer.set_steps(static_cast<std::int64_t>(number("adam_steps")));

  std::size_t loaded_params = 0;
  for (const auto& name : names) {
    Tensor t;
    try {
      t = read_tensor(is);
    } catch (const Error& e) {
      throw DataError("checkpoint: " + std::string(e.what()));
    }
    const auto dot = name.find('.');
    const std::string kind = name.substr(0, dot), rest = name.substr(dot + 1);
    if (kind == "param") {
      if (!ck.state.has_param(rest)) throw DataError("checkpoint: unknown parameter " + rest);
      Tensor p = ck.state.param(rest);
      if (p.shape() != t.shape()) throw DataError("checkpoint: shape mismatch for " + rest);
      std::copy(t.data().begin(), t.data().end(), p.mutable_data().begin());
      ++loaded_params;
    } else if (kind == "bn_mean") {
      ck.state.stats(rest).running_mean = tensor_vec(t);
    } else if (kind == "bn_var") {
      ck.state.stats(rest).running_var = tensor_vec(t);
    } else if (kind == "adam_m") {
      ck.optimizer.first_moments()[rest] = tensor_vec(t);
    } else if (kind == "adam_v") {
      ck.optimizer.second_moments()[rest] = tensor_vec(t);
    } else {
      throw DataError("checkpoint: unknown record " + name);
    }
  }
  if (loaded_params != ck.state.param_names().size()) {
    throw DataError("checkpoint: missing parameters");
  }
  return ck;
}

}  // namespace dgc::model
