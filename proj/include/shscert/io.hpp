#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shscert/augment.hpp"
#include "shscert/bound.hpp"
#include "shscert/certify.hpp"
#include "shscert/model.hpp"
#include "shscert/poly.hpp"
#include "shscert/sim.hpp"
#include "shscert/synth.hpp"

namespace shscert {

using Json = nlohmann::ordered_json;

/// Malformed input. `location` is "file:line:column" for syntax errors and a
/// JSON pointer (e.g. "/drift/0/terms/1/coef") for schema errors.
class IoError : public std::runtime_error {
 public:
  IoError(std::string location, const std::string& message)
      : std::runtime_error(location.empty() ? message : location + ": " + message),
        location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

Json parse_json(const std::string& text, const std::string& source = "<input>");
Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

Json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const Json& j, const std::string& at = "");

Json to_json(const IntervalBox& box);
IntervalBox box_from_json(const Json& j, const std::string& at = "");

Json to_json(const JumpParams& jp);
JumpParams jump_params_from_json(const Json& j, const std::string& at = "");

Json to_json(const ShsModel& model);
ShsModel model_from_json(const Json& j, const std::string& at = "");

Json to_json(const CbcCandidate& c);
CbcCandidate candidate_from_json(const Json& j, const std::string& at = "");

Json to_json(const CbcReport& r);
Json to_json(const Acbc& a);
Acbc acbc_from_json(const Json& j, const std::string& at = "");
Json to_json(const AcbcReport& r);
Json to_json(const SafetyBound& b);
Json to_json(const MonteCarloReport& r);

Json to_json(const SynthTemplate& t);
SynthTemplate synth_template_from_json(const Json& j, const std::string& at = "");
Json to_json(const SynthResult& r);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Columns k, time, z, scenario, x_1..x_n, B_value; B_value is empty when no
/// certificate was attached. The initial row has an empty scenario.
void write_trajectory_csv(std::ostream& os, const Trajectory& t, std::size_t state_dim);
std::string trajectory_csv(const Trajectory& t, std::size_t state_dim);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace shscert
