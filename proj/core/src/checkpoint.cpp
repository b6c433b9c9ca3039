#include "ehjb/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "ehjb/csv.hpp"

namespace ehjb {

namespace {

constexpr char kMagic[8] = {'E', 'H', 'J', 'B', 'C', 'K', 'P', 'T'};

std::uint64_t read_u64_le(const std::string& bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

double read_f64_le(const std::string& bytes, std::size_t offset) {
  return std::bit_cast<double>(read_u64_le(bytes, offset));
}

}  // namespace

std::string encode_checkpoint(const MlpParams& params) {
  params.validate();
  nlohmann::json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["layer_sizes"] = params.layer_sizes;
  header["seed"] = params.seed;
  header["weights"] = nlohmann::json::array();
  header["biases"] = nlohmann::json::array();

  std::string payload;
  std::size_t offset = 0;
  for (const auto& w : params.weights) {
    header["weights"].push_back({{"offset", offset}, {"rows", w.rows()}, {"cols", w.cols()}});
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) append_f64_le(payload, w(i, j));
    offset += static_cast<std::size_t>(w.size());
  }
  for (const auto& b : params.biases) {
    header["biases"].push_back({{"offset", offset}, {"size", b.size()}});
    for (Eigen::Index i = 0; i < b.size(); ++i) append_f64_le(payload, b[i]);
    offset += static_cast<std::size_t>(b.size());
  }

  const std::string text = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  append_u64_le(out, text.size());
  out += text;
  out += payload;
  return out;
}

MlpParams decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw ConfigError("not an ehjb checkpoint (bad magic)");
  const std::uint64_t header_len = read_u64_le(bytes, 8);
  if (header_len > bytes.size() - 16) throw ConfigError("truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint header: ") + e.what());
  }
  const std::size_t payload_begin = 16 + header_len;
  const std::size_t payload_count = (bytes.size() - payload_begin) / 8;

  try {
    if (header.at("format_version").get<int>() != kCheckpointFormatVersion)
      throw ConfigError("unsupported checkpoint format_version");
    MlpParams params;
    params.layer_sizes = header.at("layer_sizes").get<std::vector<int>>();
    params.seed = header.at("seed").get<std::uint64_t>();
    validate_layer_sizes(params.layer_sizes);
    auto element = [&](std::size_t index) {
      if (index >= payload_count) throw ConfigError("checkpoint payload is truncated");
      return read_f64_le(bytes, payload_begin + 8 * index);
    };
    for (const auto& w : header.at("weights")) {
      const auto off = w.at("offset").get<std::size_t>();
      Eigen::MatrixXd m(w.at("rows").get<Eigen::Index>(), w.at("cols").get<Eigen::Index>());
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = element(off + i * m.cols() + j);
      params.weights.push_back(std::move(m));
    }
    for (const auto& b : header.at("biases")) {
      const auto off = b.at("offset").get<std::size_t>();
      Eigen::VectorXd v(b.at("size").get<Eigen::Index>());
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = element(off + i);
      params.biases.push_back(std::move(v));
    }
    params.validate();
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint header: ") + e.what());
  }
}

void save_checkpoint(const MlpParams& params, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(params));
}

MlpParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace ehjb
