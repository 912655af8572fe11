#include "hypervae/app/checkpoint.hpp"

#include "hypervae/app/fingerprint.hpp"
#include "hypervae/data/samples.hpp"
#include "hypervae/error.hpp"

#include "json.hpp"

#include <bit>
#include <cstring>

namespace hypervae::app {
namespace {

using json = nlohmann::ordered_json;

constexpr char magic[8] = {'H', 'Y', 'P', 'V', 'A', 'E', 'C', 'K'};
constexpr std::size_t prefix_size = sizeof(magic) + 4 + 8;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

json normalization_json(const std::optional<data::NormalizationParams>& norm) {
  if (!norm) return nullptr;
  return {{"min", norm->min}, {"max", norm->max}, {"computed_on", norm->computed_on}};
}

std::optional<data::NormalizationParams> normalization_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  data::NormalizationParams p;
  p.min = j.at("min").get<std::vector<double>>();
  p.max = j.at("max").get<std::vector<double>>();
  p.computed_on = j.at("computed_on").get<std::string>();
  return p;
}

json grid_json(const std::optional<data::SpectralGrid>& grid) {
  if (!grid) return nullptr;
  return {{"id", grid->id()},
          {"mission", data::mission_name(grid->mission)},
          {"band_centers", grid->band_centers}};
}

std::optional<data::SpectralGrid> grid_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  data::SpectralGrid g;
  g.mission = data::parse_mission(j.at("mission").get<std::string>());
  g.band_centers = j.at("band_centers").get<std::vector<double>>();
  return g;
}

struct Tensors {
  std::vector<std::string> names;
  nn::ParameterList spans;
};

Tensors collect(vae::VaeParameters& m) {
  Tensors t{vae::parameter_names(), vae::parameter_list(m)};
  auto bn = vae::buffer_names();
  auto bl = vae::buffer_list(m);
  t.names.insert(t.names.end(), bn.begin(), bn.end());
  t.spans.insert(t.spans.end(), bl.begin(), bl.end());
  return t;
}

Tensors collect(mdn::MdnParameters& m) {
  Tensors t{mdn::parameter_names(m.arch), mdn::parameter_list(m)};
  auto bn = mdn::buffer_names(m.arch);
  auto bl = mdn::buffer_list(m);
  t.names.insert(t.names.end(), bn.begin(), bn.end());
  t.spans.insert(t.spans.end(), bl.begin(), bl.end());
  return t;
}

json header_for(const vae::VaeParameters& m) {
  const auto& a = m.arch;
  return {{"model", "vae"},
          {"kind", vae::kind_name(a.kind)},
          {"architecture",
           {{"input_dim", a.input_dim},
            {"encoder_hidden", a.encoder_hidden},
            {"latent_dim", a.latent_dim},
            {"decoder_hidden", a.decoder_hidden},
            {"output_dim", a.output_dim}}},
          {"kl_weight", m.kl_weight},
          {"batchnorm",
           {{"momentum", m.encoder[0].norm.momentum}, {"epsilon", m.encoder[0].norm.epsilon}}},
          {"grid", grid_json(m.grid)},
          {"normalization", normalization_json(m.normalization)}};
}

json header_for(const mdn::MdnParameters& m) {
  const auto& a = m.arch;
  json bn = nullptr;
  if (!m.trunk.empty()) {
    bn = {{"momentum", m.trunk[0].norm.momentum}, {"epsilon", m.trunk[0].norm.epsilon}};
  }
  return {{"model", "mdn"},
          {"kind", mdn::target_name(a.target)},
          {"architecture",
           {{"input_dim", a.input_dim},
            {"output_dim", a.output_dim},
            {"n_components", a.n_components},
            {"hidden", a.hidden}}},
          {"batchnorm", bn},
          {"grid", grid_json(m.grid)},
          {"normalization", normalization_json(m.normalization)}};
}

template <typename Layer>
void set_norm_settings(Layer& block, const json& bn) {
  if (bn.is_null()) return;
  block.norm.momentum = bn.at("momentum").get<double>();
  block.norm.epsilon = bn.at("epsilon").get<double>();
}

Model skeleton(const json& h) {
  nn::Rng rng(0);
  const auto model = h.at("model").get<std::string>();
  const auto& a = h.at("architecture");
  if (model == "vae") {
    vae::Architecture arch;
    arch.kind = vae::parse_kind(h.at("kind").get<std::string>());
    arch.input_dim = a.at("input_dim").get<int>();
    arch.encoder_hidden = a.at("encoder_hidden").get<std::array<int, 2>>();
    arch.latent_dim = a.at("latent_dim").get<int>();
    arch.decoder_hidden = a.at("decoder_hidden").get<std::array<int, 2>>();
    arch.output_dim = a.at("output_dim").get<int>();
    auto m = vae::build_vae(arch, h.at("kl_weight").get<double>(), rng);
    for (auto& b : m.encoder) set_norm_settings(b, h.at("batchnorm"));
    for (auto& b : m.decoder) set_norm_settings(b, h.at("batchnorm"));
    m.grid = grid_from(h.at("grid"));
    m.normalization = normalization_from(h.at("normalization"));
    return m;
  }
  if (model == "mdn") {
    mdn::MdnArchitecture arch;
    arch.target = mdn::parse_target(h.at("kind").get<std::string>());
    arch.input_dim = a.at("input_dim").get<int>();
    arch.output_dim = a.at("output_dim").get<int>();
    arch.n_components = a.at("n_components").get<int>();
    arch.hidden = a.at("hidden").get<std::vector<int>>();
    auto m = mdn::build_mdn(arch, rng);
    for (auto& b : m.trunk) set_norm_settings(b, h.at("batchnorm"));
    m.grid = grid_from(h.at("grid"));
    m.normalization = normalization_from(h.at("normalization"));
    return m;
  }
  fail(ErrorCode::parse_error, "checkpoint holds unknown model type '" + model + "'");
}

}  // namespace

std::string serialize_checkpoint(const Model& model) {
  Model copy = model;  // span collection needs mutable access
  json header;
  Tensors tensors;
  std::visit(
      [&](auto& m) {
        header = header_for(m);
        tensors = collect(m);
      },
      copy);
  json list = json::array();
  for (std::size_t i = 0; i < tensors.names.size(); ++i) {
    list.push_back({{"name", tensors.names[i]}, {"size", tensors.spans[i].size()}});
  }
  header["tensors"] = std::move(list);
  const std::string header_text = header.dump();

  std::string out(magic, sizeof(magic));
  put<std::uint32_t>(out, checkpoint_format_version);
  put<std::uint64_t>(out, header_text.size());
  out += header_text;
  for (const auto& span : tensors.spans) {
    out.append(reinterpret_cast<const char*>(span.data()), span.size_bytes());
  }
  const Digest digest = sha256(out);
  out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
  return out;
}

Model deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < prefix_size + 32 || std::memcmp(bytes.data(), magic, sizeof(magic)) != 0) {
    fail(ErrorCode::checksum_mismatch, "not a checkpoint file (bad magic or truncated)");
  }
  const auto version = get<std::uint32_t>(bytes, sizeof(magic));
  if (version != checkpoint_format_version) {
    fail(ErrorCode::version_mismatch, "checkpoint format version " + std::to_string(version) +
                                          " is not supported (expected " +
                                          std::to_string(checkpoint_format_version) + ")");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 32);
  const Digest digest = sha256(body);
  if (std::memcmp(digest.data(), bytes.data() + body.size(), digest.size()) != 0) {
    fail(ErrorCode::checksum_mismatch, "checkpoint checksum mismatch (corrupt or truncated)");
  }

  const auto header_len = get<std::uint64_t>(bytes, sizeof(magic) + 4);
  if (header_len > body.size() - prefix_size) {
    fail(ErrorCode::parse_error, "checkpoint header length exceeds file size");
  }
  json header;
  try {
    header = json::parse(body.substr(prefix_size, header_len));
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("checkpoint header: ") + e.what());
  }

  Model model;
  try {
    model = skeleton(header);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, std::string("checkpoint header: ") + e.what());
  }
  Tensors tensors;
  std::visit([&](auto& m) { tensors = collect(m); }, model);

  const auto& listed = header.at("tensors");
  if (listed.size() != tensors.names.size()) {
    fail(ErrorCode::parse_error, "checkpoint tensor count does not match its architecture");
  }
  std::size_t offset = prefix_size + header_len;
  for (std::size_t i = 0; i < tensors.names.size(); ++i) {
    const auto name = listed[i].at("name").get<std::string>();
    const auto size = listed[i].at("size").get<std::size_t>();
    if (name != tensors.names[i] || size != tensors.spans[i].size()) {
      fail(ErrorCode::parse_error, "checkpoint tensor '" + name + "' does not match '" +
                                       tensors.names[i] + "'");
    }
    const std::size_t n_bytes = size * sizeof(double);
    if (offset + n_bytes > body.size()) {
      fail(ErrorCode::parse_error, "checkpoint payload is shorter than its tensor list");
    }
    std::memcpy(tensors.spans[i].data(), body.data() + offset, n_bytes);
    offset += n_bytes;
  }
  if (offset != body.size()) fail(ErrorCode::parse_error, "checkpoint has trailing payload bytes");
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  data::write_text(path, serialize_checkpoint(model));
}

Model load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(data::read_text(path));
}

}  // namespace hypervae::app
