#pragma once

// Loader for QR symbols produced by an independent reference encoder and
// frozen as text: a small header followed by one row of 0/1 per module row.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "metascanner/qr_codec.hpp"

namespace oracle {

struct QrReference {
  std::string name;
  int version = 0;
  metascanner::qr::EcLevel level = metascanner::qr::EcLevel::L;
  int mask = 0;
  std::string mode;
  std::string payload;
  metascanner::qr::ModuleMatrix matrix;
};

inline std::string unhex(const std::string& hex) {
  std::string out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<char>(std::stoi(hex.substr(i, 2), nullptr, 16)));
  }
  return out;
}

inline QrReference load_qr_reference(const std::filesystem::path& path) {
  std::ifstream in(path);
  QrReference ref;
  ref.name = path.stem().string();
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key, value;
    ss >> key >> value;
    if (key == "version") ref.version = std::stoi(value);
    else if (key == "error") ref.level = static_cast<metascanner::qr::EcLevel>(std::string("LMQH").find(value));
    else if (key == "mask") ref.mask = std::stoi(value);
    else if (key == "mode") ref.mode = value;
    else if (key == "payload") ref.payload = unhex(value);
    else if (!key.empty()) rows.push_back(key);
  }
  ref.matrix = metascanner::qr::ModuleMatrix(static_cast<int>(rows.size()));
  for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
    for (int c = 0; c < static_cast<int>(rows[r].size()); ++c) ref.matrix.set(r, c, rows[r][c] == '1');
  }
  return ref;
}

inline std::vector<QrReference> load_qr_references(const std::filesystem::path& dir,
                                                   const std::string& prefix) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().filename().string().starts_with(prefix)) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<QrReference> out;
  for (const auto& f : files) out.push_back(load_qr_reference(f));
  return out;
}

}  // namespace oracle
