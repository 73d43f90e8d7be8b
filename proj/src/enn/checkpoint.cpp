#include "deepex/enn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "deepex/errors.hpp"

namespace deepex::enn {
namespace {

constexpr char kMagic[8] = {'D', 'E', 'E', 'P', 'E', 'X', 'C', 'K'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes = 8) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::vector<std::uint8_t>& in, std::size_t& pos, int bytes = 8) {
  if (pos + static_cast<std::size_t>(bytes) > in.size()) throw ValidationError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
  pos += static_cast<std::size_t>(bytes);
  return v;
}

void put_double(std::vector<std::uint8_t>& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

double get_double(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  return std::bit_cast<double>(get_u64(in, pos));
}

nlohmann::json describe(const nn::DenseNet& net, const std::string& role, std::size_t index, bool frozen) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers())
    layers.push_back({{"rows", l.weight.rows()},
                      {"cols", l.weight.cols()},
                      {"activation", l.activation == nn::Activation::kRelu ? "relu" : "identity"}});
  return {{"role", role}, {"index", index}, {"frozen", frozen}, {"layers", layers}};
}

void write_params(std::vector<std::uint8_t>& out, const nn::DenseNet& net) {
  for (const auto& l : net.layers()) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) put_double(out, l.weight.data()[i]);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) put_double(out, l.bias[i]);
  }
}

nn::DenseNet read_net(const nlohmann::json& desc, const std::vector<std::uint8_t>& in, std::size_t& pos) {
  std::vector<nn::DenseLayer> layers;
  for (const auto& ld : desc.at("layers")) {
    nn::DenseLayer l;
    const auto rows = ld.at("rows").get<Eigen::Index>();
    const auto cols = ld.at("cols").get<Eigen::Index>();
    if (rows <= 0 || cols <= 0) throw ValidationError("checkpoint layer has a non-positive dimension");
    const auto act = ld.at("activation").get<std::string>();
    if (act == "relu") {
      l.activation = nn::Activation::kRelu;
    } else if (act == "identity") {
      l.activation = nn::Activation::kIdentity;
    } else {
      throw ValidationError("checkpoint: unknown activation '" + act + "'");
    }
    l.weight.resize(rows, cols);
    l.bias.resize(rows);
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = get_double(in, pos);
    for (Eigen::Index i = 0; i < rows; ++i) l.bias[i] = get_double(in, pos);
    layers.push_back(std::move(l));
  }
  return nn::DenseNet(std::move(layers));
}

}  // namespace

std::vector<std::uint8_t> serialize(const Checkpoint& checkpoint) {
  nlohmann::json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["metadata"] = checkpoint.metadata;
  std::vector<const nn::DenseNet*> nets;
  nlohmann::json descs = nlohmann::json::array();

  if (const auto* plain = std::get_if<nn::DenseNet>(&checkpoint.model)) {
    header["kind"] = "plain";
    descs.push_back(describe(*plain, "value", 0, false));
    nets.push_back(plain);
  } else if (const auto* ens = std::get_if<EnsembleNet>(&checkpoint.model)) {
    header["kind"] = "ensemble";
    header["prior_scale"] = ens->prior_scale();
    for (std::size_t m = 0; m < ens->size(); ++m) {
      descs.push_back(describe(ens->base(m), "base", m, false));
      nets.push_back(&ens->base(m));
    }
    for (std::size_t m = 0; m < ens->size(); ++m) {
      descs.push_back(describe(ens->prior(m), "prior", m, true));
      nets.push_back(&ens->prior(m));
    }
  } else {
    const auto& epi = std::get<EpiNet>(checkpoint.model);
    header["kind"] = "epinet";
    header["prior_scale"] = epi.prior_scale();
    header["index_dim"] = epi.index_dim();
    descs.push_back(describe(epi.base(), "base", 0, false));
    descs.push_back(describe(epi.head(), "head", 0, false));
    descs.push_back(describe(epi.prior_head(), "prior_head", 0, true));
    nets = {&epi.base(), &epi.head(), &epi.prior_head()};
  }
  header["networks"] = descs;

  const std::string text = header.dump();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u64(out, kCheckpointFormatVersion, 4);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto* n : nets) write_params(out, *n);
  return out;
}

Checkpoint deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw ValidationError("not a deepex checkpoint (bad magic)");
  std::size_t pos = sizeof kMagic;
  const auto version = get_u64(bytes, pos, 4);
  if (version != kCheckpointFormatVersion)
    throw ValidationError("unsupported checkpoint format version " + std::to_string(version));
  const auto header_len = get_u64(bytes, pos);
  if (pos + header_len > bytes.size()) throw ValidationError("checkpoint header truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(pos + header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  pos += header_len;

  Checkpoint cp;
  cp.metadata = header.value("metadata", nlohmann::json::object());
  const auto& descs = header.at("networks");
  std::vector<nn::DenseNet> nets;
  for (const auto& d : descs) nets.push_back(read_net(d, bytes, pos));
  if (pos != bytes.size()) throw ValidationError("checkpoint has trailing bytes");

  const auto kind = header.at("kind").get<std::string>();
  if (kind == "plain") {
    if (nets.size() != 1) throw ValidationError("plain checkpoint must hold one network");
    cp.model = std::move(nets[0]);
  } else if (kind == "ensemble") {
    if (nets.empty() || nets.size() % 2 != 0) throw ValidationError("ensemble checkpoint needs base/prior pairs");
    const std::size_t m = nets.size() / 2;
    std::vector<nn::DenseNet> base(std::make_move_iterator(nets.begin()),
                                   std::make_move_iterator(nets.begin() + static_cast<std::ptrdiff_t>(m)));
    std::vector<nn::DenseNet> prior(std::make_move_iterator(nets.begin() + static_cast<std::ptrdiff_t>(m)),
                                    std::make_move_iterator(nets.end()));
    cp.model = EnsembleNet(std::move(base), std::move(prior), header.at("prior_scale").get<double>());
  } else if (kind == "epinet") {
    if (nets.size() != 3) throw ValidationError("epinet checkpoint must hold base, head and prior head");
    cp.model = EpiNet(std::move(nets[0]), std::move(nets[1]), std::move(nets[2]),
                      header.at("prior_scale").get<double>(), header.at("index_dim").get<std::size_t>());
  } else {
    throw ValidationError("unknown checkpoint kind '" + kind + "'");
  }
  return cp;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const auto bytes = serialize(checkpoint);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

std::uint64_t model_checksum(const ModelParams& model) {
  if (const auto* plain = std::get_if<nn::DenseNet>(&model)) return plain->checksum();
  if (const auto* ens = std::get_if<EnsembleNet>(&model)) {
    std::uint64_t h = ens->prior_checksum();
    for (std::size_t m = 0; m < ens->size(); ++m) h = mix64(h ^ ens->base(m).checksum());
    return h;
  }
  const auto& epi = std::get<EpiNet>(model);
  return mix64(mix64(epi.base().checksum() ^ epi.head().checksum()) ^ epi.prior_checksum());
}

}  // namespace deepex::enn
