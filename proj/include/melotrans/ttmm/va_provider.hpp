/**
 * @file va_provider.hpp
 * @brief Text to valence/arousal providers.
 *
 * Values live on a 1..9 scale. Following the motif mapping's convention, low
 * valence reads as pleasant ("happy" sits near 2, "sad" near 7.5).
 */

#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace melotrans::ttmm {

struct VAPoint {
  double valence = 5.0;
  double arousal = 5.0;

  bool operator==(const VAPoint&) const = default;
};

/// Out-of-range valence (outside [1,9]) or arousal (outside (0,9]).
class RangeError : public std::out_of_range {
 public:
  explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

/// A provider could not produce a value; the message starts with its name.
class ProviderError : public std::runtime_error {
 public:
  explicit ProviderError(const std::string& what) : std::runtime_error(what) {}
};

void check_va(const VAPoint& va);

/// Parses "v,a" (whitespace tolerated) and range-checks it.
VAPoint parse_va(const std::string& text);

class VAProvider {
 public:
  virtual ~VAProvider() = default;
  virtual std::string name() const = 0;
  virtual VAPoint predict(const std::string& text) const = 0;
};

/// Returns a fixed point regardless of the text.
class BypassProvider : public VAProvider {
 public:
  explicit BypassProvider(VAPoint va);
  std::string name() const override { return "bypass"; }
  VAPoint predict(const std::string&) const override { return va_; }

 private:
  VAPoint va_;
};

/// Averages the entries of every lexicon word found in the text; (5,5) when
/// nothing matches. Words are lower-cased runs of letters and apostrophes.
class LexiconProvider : public VAProvider {
 public:
  LexiconProvider();  ///< built-in table
  explicit LexiconProvider(std::map<std::string, VAPoint> table);
  /// TSV rows "word<TAB>valence<TAB>arousal"; '#' starts a comment line.
  static LexiconProvider from_tsv(const std::string& path);

  std::string name() const override { return "lexicon"; }
  VAPoint predict(const std::string& text) const override;
  const std::map<std::string, VAPoint>& table() const { return table_; }

 private:
  std::map<std::string, VAPoint> table_;
};

/// Runs a shell command with the text on stdin and reads "valence arousal"
/// (space or comma separated) from its stdout.
class ExternalProvider : public VAProvider {
 public:
  explicit ExternalProvider(std::string command) : command_(std::move(command)) {}
  std::string name() const override { return "external"; }
  VAPoint predict(const std::string& text) const override;

 private:
  std::string command_;
};

/// Checks that the text is not blank, asks the provider, and range-checks
/// the answer. Provider failures come back as ProviderError.
VAPoint text_to_va(const VAProvider& provider, const std::string& text);

}  // namespace melotrans::ttmm
