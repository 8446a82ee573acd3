#include "chansel/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chansel/error.hpp"

namespace chansel {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct LabelRow {
  int label;
  Split split;
};

std::vector<LabelRow> read_labels(const fs::path& p, std::size_t n_classes) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(p.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "trial,label,split") {
    throw ValidationError(p.string() + ": expected header 'trial,label,split', got '" + line + "'");
  }
  std::vector<LabelRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) throw ValidationError(p.string() + ": malformed row '" + line + "'");
    std::size_t trial = 0;
    long label = 0;
    try {
      std::size_t pos = 0;
      trial = std::stoul(cells[0], &pos);
      if (pos != cells[0].size()) throw std::invalid_argument("trial");
      label = std::stol(cells[1], &pos);
      if (pos != cells[1].size()) throw std::invalid_argument("label");
    } catch (const std::logic_error&) {
      throw ValidationError(p.string() + ": malformed row '" + line + "'");
    }
    if (trial != rows.size()) {
      throw ValidationError(p.string() + ": row " + std::to_string(rows.size()) +
                            " names trial " + std::to_string(trial));
    }
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
      throw ValidationError(p.string() + ": label " + std::to_string(label) + " of trial " +
                            std::to_string(trial) + " is not below the class count " +
                            std::to_string(n_classes));
    }
    rows.push_back({static_cast<int>(label), parse_split(cells[2])});
  }
  return rows;
}

}  // namespace

EpochedDataset load_dataset(const fs::path& dir) {
  for (const char* name : {kMetaFile, kTrialsFile, kLabelsFile}) {
    if (!fs::exists(dir / name)) throw IoError("missing file " + (dir / name).string());
  }

  json meta;
  try {
    meta = json::parse(read_text(dir / kMetaFile));
  } catch (const json::parse_error& e) {
    throw ValidationError((dir / kMetaFile).string() + ": " + e.what());
  }

  double fs_hz = 0.0;
  std::size_t n_samples = 0;
  std::vector<std::string> classes;
  std::vector<Electrode> electrodes;
  try {
    fs_hz = meta.at("fs_hz").get<double>();
    n_samples = meta.at("n_samples").get<std::size_t>();
    classes = meta.at("classes").get<std::vector<std::string>>();
    for (const auto& ch : meta.at("channels")) {
      electrodes.push_back(
          {ch.at("name").get<std::string>(), ch.at("x").get<double>(), ch.at("y").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ValidationError((dir / kMetaFile).string() + ": " + e.what());
  }
  ChannelLayout layout(std::move(electrodes));

  const auto rows = read_labels(dir / kLabelsFile, classes.size());
  const std::size_t n = rows.size();
  const std::size_t c = layout.size();
  const std::size_t expected = n * c * n_samples * sizeof(float);
  const auto actual = fs::file_size(dir / kTrialsFile);
  if (actual != expected) {
    throw ValidationError((dir / kTrialsFile).string() + " has " + std::to_string(actual) +
                          " bytes; meta.json and labels.csv imply " + std::to_string(n) + "x" +
                          std::to_string(c) + "x" + std::to_string(n_samples) + " float32 = " +
                          std::to_string(expected) + " bytes");
  }

  std::ifstream blob(dir / kTrialsFile, std::ios::binary);
  if (!blob) throw IoError("cannot open " + (dir / kTrialsFile).string());
  std::vector<std::uint32_t> raw(n * c * n_samples);
  blob.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(expected));
  if (!blob) throw IoError("short read on " + (dir / kTrialsFile).string());

  std::vector<Trial> trials;
  trials.reserve(n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Trial t{SignalMatrix(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(n_samples)),
            rows[i].label, rows[i].split};
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t s = 0; s < n_samples; ++s, ++k) {
        const float v = std::bit_cast<float>(to_little_endian(raw[k]));
        if (!std::isfinite(v)) {
          throw ValidationError("non-finite sample at trial " + std::to_string(i) + ", channel " +
                                std::to_string(ch) + ", sample " + std::to_string(s));
        }
        t.data(static_cast<Eigen::Index>(ch), static_cast<Eigen::Index>(s)) = v;
      }
    }
    trials.push_back(std::move(t));
  }
  return EpochedDataset(std::move(trials), fs_hz, std::move(layout), std::move(classes));
}

void save_dataset(const EpochedDataset& dataset, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  json meta;
  meta["fs_hz"] = dataset.fs();
  meta["n_samples"] = dataset.n_samples();
  meta["classes"] = dataset.class_names();
  meta["channels"] = json::array();
  for (const auto& e : dataset.layout().entries()) {
    meta["channels"].push_back({{"name", e.name}, {"x", e.x}, {"y", e.y}});
  }
  {
    std::ofstream out(dir / kMetaFile, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / kMetaFile).string());
    out << meta.dump(2) << '\n';
    if (!out) throw IoError("write failed on " + (dir / kMetaFile).string());
  }

  {
    std::vector<std::uint32_t> raw;
    raw.reserve(dataset.n_trials() * dataset.n_channels() * dataset.n_samples());
    for (const auto& t : dataset.trials()) {
      for (Eigen::Index ch = 0; ch < t.data.rows(); ++ch) {
        for (Eigen::Index s = 0; s < t.data.cols(); ++s) {
          raw.push_back(to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(t.data(ch, s)))));
        }
      }
    }
    std::ofstream out(dir / kTrialsFile, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / kTrialsFile).string());
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
    if (!out) throw IoError("write failed on " + (dir / kTrialsFile).string());
  }

  {
    std::ofstream out(dir / kLabelsFile, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / kLabelsFile).string());
    out << "trial,label,split\n";
    for (std::size_t i = 0; i < dataset.n_trials(); ++i) {
      const auto& t = dataset.trial(i);
      out << i << ',' << t.label << ',' << to_string(t.split) << '\n';
    }
    if (!out) throw IoError("write failed on " + (dir / kLabelsFile).string());
  }
}

}  // namespace chansel
