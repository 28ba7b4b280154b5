#include "mpsdp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mpsdp/errors.hpp"

namespace mpsdp {

namespace {

json encode(const Tensor& t, std::size_t axis, std::size_t offset,
            const std::vector<std::size_t>& strides) {
  if (axis == t.rank()) {
    const cplx v = t[offset];
    return json::array({v.real(), v.imag()});
  }
  json arr = json::array();
  for (std::size_t i = 0; i < t.extent(axis); ++i) {
    arr.push_back(encode(t, axis + 1, offset + i * strides[axis], strides));
  }
  return arr;
}

bool is_leaf(const json& j) {
  return j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number();
}

void infer_shape(const json& j, Shape& shape) {
  const json* cur = &j;
  while (!is_leaf(*cur)) {
    if (!cur->is_array() || cur->empty()) throw ShapeError("tensor JSON must be a nested, non-empty array");
    shape.push_back(cur->size());
    cur = &(*cur)[0];
  }
}

void decode(const json& j, const Shape& shape, std::size_t axis, std::vector<cplx>& out) {
  if (axis == shape.size()) {
    if (!is_leaf(j)) throw ShapeError("tensor JSON leaf must be [re, im]");
    out.emplace_back(j[0].get<double>(), j[1].get<double>());
    return;
  }
  if (!j.is_array() || j.size() != shape[axis] || is_leaf(j)) {
    throw ShapeError("ragged tensor JSON at depth " + std::to_string(axis));
  }
  for (const auto& e : j) decode(e, shape, axis + 1, out);
}

std::size_t get_size(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    throw ShapeError(std::string("MPS file: missing or invalid '") + key + "'");
  }
  return j[key].get<std::size_t>();
}

}  // namespace

json tensor_to_json(const Tensor& t) {
  return encode(t, 0, 0, strides_of(t.shape()));
}

Tensor tensor_from_json(const json& j) {
  Shape shape;
  infer_shape(j, shape);
  std::vector<cplx> data;
  data.reserve(shape_size(shape));
  decode(j, shape, 0, data);
  return Tensor(shape, std::move(data));
}

json mps_to_json(const CanonicalMps& m) {
  json j;
  j["version"] = 1;
  j["n"] = m.n;
  j["d"] = m.d;
  j["D"] = m.D;
  j["d_end"] = m.d_end;
  j["s"] = m.s;
  j["gamma_left"] = tensor_to_json(m.gamma_left);
  j["lambda2"] = m.lambda2;
  json bs = json::array();
  for (const auto& b : m.b_tensors) bs.push_back(tensor_to_json(b));
  j["b_tensors"] = std::move(bs);
  j["gamma_right"] = tensor_to_json(m.gamma_right);
  return j;
}

CanonicalMps mps_from_json(const json& j) {
  if (!j.is_object() || !j.contains("version") || j["version"] != 1) {
    throw ShapeError("MPS file: unsupported or missing version");
  }
  CanonicalMps m;
  m.n = get_size(j, "n");
  m.d = get_size(j, "d");
  m.D = get_size(j, "D");
  m.d_end = get_size(j, "d_end");
  m.s = get_size(j, "s");
  m.gamma_left = tensor_from_json(j.at("gamma_left"));
  m.lambda2 = j.at("lambda2").get<std::vector<double>>();
  for (const auto& b : j.at("b_tensors")) m.b_tensors.push_back(tensor_from_json(b));
  m.gamma_right = tensor_from_json(j.at("gamma_right"));
  m.validate();
  return m;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

std::string result_digest(const json& doc) {
  json copy = doc;
  if (copy.is_object()) {
    copy.erase("timings");
    copy.erase("digest");
  }
  const std::string text = copy.dump();
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace mpsdp
