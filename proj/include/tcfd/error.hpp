#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tcfd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid numeric input (negative assets, non-finite logits, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ExtractionError : public Error {
 public:
  ExtractionError(std::string report_id, const std::string& what)
      : Error("extraction failed for report '" + report_id + "': " + what),
        report_id_(std::move(report_id)) {}

  const std::string& report_id() const noexcept { return report_id_; }

 private:
  std::string report_id_;
};

class ScoringError : public Error {
 public:
  ScoringError(std::string sequence_id, std::string label_code, const std::string& what)
      : Error("scoring failed for sequence '" + sequence_id + "', label '" + label_code +
              "': " + what),
        sequence_id_(std::move(sequence_id)),
        label_code_(std::move(label_code)) {}

  const std::string& sequence_id() const noexcept { return sequence_id_; }
  const std::string& label_code() const noexcept { return label_code_; }

 private:
  std::string sequence_id_;
  std::string label_code_;
};

class MissingDataError : public Error {
 public:
  using Error::Error;
};

// A record refers to an id that does not exist on the other side of a join.
class ReferentialError : public Error {
 public:
  ReferentialError(const std::string& what, std::vector<std::string> offenders)
      : Error(format(what, offenders)), offenders_(std::move(offenders)) {}

  const std::vector<std::string>& offenders() const noexcept { return offenders_; }

 private:
  static std::string format(const std::string& what, const std::vector<std::string>& ids) {
    std::string msg = what + " (" + std::to_string(ids.size()) + " offending ids:";
    const std::size_t shown = ids.size() < 10 ? ids.size() : 10;
    for (std::size_t i = 0; i < shown; ++i) msg += " " + ids[i];
    if (shown < ids.size()) msg += " ...";
    return msg + ")";
  }

  std::vector<std::string> offenders_;
};

}  // namespace tcfd

namespace tcfd {

// Non-fatal condition attached to a report, sequence or label.
struct Warning {
  std::string subject;
  std::string message;

  bool operator==(const Warning&) const = default;
};

}  // namespace tcfd
