#include "dispatch/network.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dispatch::rl {
namespace {

constexpr std::string_view kMagic = "DQNCKPT";
constexpr std::string_view kVersion = "v1";
constexpr std::size_t kMaxLayerWidth = 1 << 16;

void write_row(std::ostream& out, std::span<const float> values) {
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(values[i]));
    if (i) out << ' ';
    out << buf;
  }
  out << '\n';
}

std::vector<float> read_row(std::istream& in, std::size_t expected, std::size_t& line_no) {
  std::string line;
  ++line_no;
  if (!std::getline(in, line)) throw ParseError(line_no, "unexpected end of checkpoint");
  std::vector<float> values;
  values.reserve(expected);
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p < end) {
    while (p < end && *p == ' ') ++p;
    if (p == end) break;
    float v = 0.0f;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{}) throw ParseError(line_no, "bad number in checkpoint");
    values.push_back(v);
    p = next;
  }
  if (values.size() != expected) {
    throw ParseError(line_no, "expected " + std::to_string(expected) + " values, got " +
                                  std::to_string(values.size()));
  }
  return values;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Mlp<float>& net, std::string_view agent_name) {
  out << kMagic << ' ' << kVersion << ' ' << agent_name << '\n';
  const auto& dims = net.dims();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out << ' ';
    out << dims[i];
  }
  out << '\n';
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    write_row(out, net.weights(l));
    write_row(out, net.biases(l));
  }
}

void save_checkpoint(const std::string& path, const Mlp<float>& net, std::string_view agent_name) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path);
  save_checkpoint(out, net, agent_name);
  if (!out) throw Error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(std::istream& in, float negative_slope) {
  std::size_t line_no = 1;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(line_no, "empty checkpoint");
  std::istringstream header(line);
  std::string magic, version, name;
  header >> magic >> version >> name;
  if (magic != kMagic) throw ParseError(line_no, "not a checkpoint file");
  if (version != kVersion) throw ParseError(line_no, "unsupported checkpoint version '" + version + "'");
  if (name.empty()) throw ParseError(line_no, "missing agent name");

  ++line_no;
  if (!std::getline(in, line)) throw ParseError(line_no, "missing layer dimensions");
  std::istringstream dims_in(line);
  std::vector<std::size_t> dims;
  std::size_t d = 0;
  while (dims_in >> d) {
    if (d > kMaxLayerWidth) throw ParseError(line_no, "layer width too large");
    dims.push_back(d);
  }
  if (!dims_in.eof() || dims.size() < 2) throw ParseError(line_no, "bad layer dimensions");

  Mlp<float> shape;
  try {
    shape = Mlp<float>(dims, negative_slope);
  } catch (const Error& e) {
    throw ParseError(line_no, e.what());
  }
  Checkpoint ckpt{name, std::move(shape)};
  for (std::size_t l = 0; l < ckpt.net.num_layers(); ++l) {
    auto w = read_row(in, dims[l] * dims[l + 1], line_no);
    std::copy(w.begin(), w.end(), ckpt.net.weights(l).begin());
    auto b = read_row(in, dims[l + 1], line_no);
    std::copy(b.begin(), b.end(), ckpt.net.biases(l).begin());
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path, float negative_slope) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  return load_checkpoint(in, negative_slope);
}

}  // namespace dispatch::rl
