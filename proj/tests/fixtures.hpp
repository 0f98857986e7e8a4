#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jel/parser.hpp"

namespace jeltest {

inline std::string data_path(const std::string& name) {
  return std::string(JEL_DATA_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::vector<jel::TraceEvent> load_fixture(const std::string& name) {
  return jel::parse_trace(read_file(data_path(name)));
}

inline std::vector<jel::TraceEvent> npe_trace() {
  return load_fixture("npe_trace.jel");
}

} // namespace jeltest
