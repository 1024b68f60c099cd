#pragma once

#include <cctype>
#include <string>

#include "cade/engine.hpp"
#include "cade/error.hpp"
#include "cade/types.hpp"

namespace cade::regression {

enum class Resolution { CompletionMap, LeadingDigitSubstitution };

/// A first-digit decision together with the numeric value it resolves to.
struct DigitDecision {
  Decision decision;
  double resolved_value = 0.0;
  Resolution resolution = Resolution::CompletionMap;
};

/// CADE applied to the distribution over the first generated digit. Semantics
/// are identical to engine::decide over the 10-digit candidate set.
inline Decision debias_first_digit(const QuestionRecord& record, const HyperParams& hp,
                                   const EngineConfig& cfg) {
  if (record.task != Task::Regression)
    throw InvalidInput("debias_first_digit: record " + record.id + " is not a regression task");
  if (record.candidates.kind != CandidateKind::Digits)
    throw InvalidInput("debias_first_digit: record " + record.id +
                       " does not carry a digit candidate set");
  return engine::decide(record, hp, cfg);
}

/// Replace the first character in '0'..'9' (scanning left to right) with the
/// chosen digit. Preserves string length and every other character.
inline std::string substitute_leading_digit(const std::string& rendered, char digit) {
  std::string out = rendered;
  for (char& c : out) {
    if (c >= '0' && c <= '9') {
      c = digit;
      return out;
    }
  }
  throw MalformedRecord("view value '" + rendered + "' contains no digit to substitute");
}

/// Turn the chosen first digit into a numeric prediction: completion lookup
/// when the record carries one, otherwise leading-digit substitution on the
/// Full view's rendered value.
inline DigitDecision resolve_value(const QuestionRecord& record, const Decision& decision) {
  if (record.task != Task::Regression)
    throw InvalidInput("resolve_value: record " + record.id + " is not a regression task");
  const std::string& digit = decision.chosen;
  if (digit.size() != 1 || digit[0] < '0' || digit[0] > '9')
    throw InvalidInput("resolve_value: chosen label '" + digit + "' is not a digit");

  DigitDecision out;
  out.decision = decision;

  auto it = record.completions.find(digit);
  if (it != record.completions.end()) {
    out.resolved_value = it->second;
    out.resolution = Resolution::CompletionMap;
    return out;
  }

  auto vv = record.view_values.find(ViewKind::FULL);
  if (vv == record.view_values.end())
    throw UnresolvableRegression("record " + record.id +
                                 ": neither completions nor view_values present");

  std::string substituted = substitute_leading_digit(vv->second, digit[0]);
  try {
    std::size_t consumed = 0;
    out.resolved_value = std::stod(substituted, &consumed);
    if (consumed != substituted.size())
      throw MalformedRecord("record " + record.id + ": unparsable view value '" + substituted + "'");
  } catch (const MalformedRecord&) {
    throw;
  } catch (const std::exception&) {
    throw MalformedRecord("record " + record.id + ": unparsable view value '" + substituted + "'");
  }
  out.resolution = Resolution::LeadingDigitSubstitution;
  return out;
}

}  // namespace cade::regression
