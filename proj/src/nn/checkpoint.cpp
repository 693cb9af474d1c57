#include "aucap/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "aucap/emb_io.hpp"
#include "aucap/error.hpp"

namespace aucap::nn {

const Eigen::MatrixXd* TensorStore::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.value;
  }
  return nullptr;
}

const Eigen::MatrixXd& TensorStore::require(std::string_view name, Eigen::Index rows,
                                            Eigen::Index cols) const {
  const Eigen::MatrixXd* m = find(name);
  if (m == nullptr) {
    throw Error(Errc::missing_artifact, "checkpoint lacks tensor '" + std::string(name) + "'");
  }
  if (m->rows() != rows || m->cols() != cols) {
    throw Error(Errc::dimension_mismatch,
                "checkpoint tensor '" + std::string(name) + "' is " + std::to_string(m->rows()) +
                    "x" + std::to_string(m->cols()) + ", model expects " + std::to_string(rows) +
                    "x" + std::to_string(cols));
  }
  return *m;
}

void TensorStore::save(const std::filesystem::path& path) const {
  std::ostringstream out(std::ios::binary);
  out << "AUCAP-CKPT v1\n";
  out << "meta " << metadata.size() << '\n' << metadata << '\n';
  for (const auto& t : tensors) {
    out << "tensor " << t.name << ' ' << t.value.rows() << ' ' << t.value.cols() << '\n';
  }
  out << "end\n";
  for (const auto& t : tensors) emb::write(out, t.value, emb::Precision::f64);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::io_failure, "cannot write " + tmp.string());
    const std::string bytes = out.str();
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(Errc::io_failure, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TensorStore TensorStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "checkpoint not found: " + path.string());
  auto corrupt = [&](const std::string& why) {
    return Error(Errc::malformed, path.string() + ": corrupt checkpoint manifest (" + why + ")");
  };

  std::string line;
  if (!std::getline(in, line) || line != "AUCAP-CKPT v1") throw corrupt("bad signature");
  if (!std::getline(in, line) || line.rfind("meta ", 0) != 0) throw corrupt("missing meta line");
  std::size_t meta_len = 0;
  try {
    meta_len = std::stoull(line.substr(5));
  } catch (const std::exception&) {
    throw corrupt("bad meta length");
  }
  TensorStore store;
  store.metadata.resize(meta_len);
  in.read(store.metadata.data(), static_cast<std::streamsize>(meta_len));
  if (static_cast<std::size_t>(in.gcount()) != meta_len || in.get() != '\n') {
    throw corrupt("truncated metadata");
  }

  struct Entry {
    std::string name;
    Eigen::Index rows, cols;
  };
  std::vector<Entry> manifest;
  std::unordered_set<std::string> names;
  for (;;) {
    if (!std::getline(in, line)) throw corrupt("missing end marker");
    if (line == "end") break;
    std::istringstream ls(line);
    std::string kw;
    Entry e;
    if (!(ls >> kw >> e.name >> e.rows >> e.cols) || kw != "tensor" || e.rows < 0 || e.cols < 0) {
      throw corrupt("bad tensor line '" + line + "'");
    }
    if (!names.insert(e.name).second) throw corrupt("duplicate tensor '" + e.name + "'");
    manifest.push_back(std::move(e));
  }
  for (const auto& e : manifest) {
    Eigen::MatrixXd m;
    try {
      m = emb::read(in);
    } catch (const Error& err) {
      throw Error(Errc::malformed, path.string() + ": payload for '" + e.name + "': " + err.what());
    }
    if (m.rows() != e.rows || m.cols() != e.cols) {
      throw corrupt("payload shape for '" + e.name + "' disagrees with manifest");
    }
    store.tensors.push_back({e.name, std::move(m)});
  }
  if (in.peek() != std::char_traits<char>::eof()) throw corrupt("trailing bytes");
  return store;
}

}  // namespace aucap::nn
