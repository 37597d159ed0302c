#ifndef MITMP_TOOLS_LOCATED_JSON_HPP
#define MITMP_TOOLS_LOCATED_JSON_HPP

#include <map>
#include <string>

#include <json.hpp>

namespace mitmp::app
{

// A parsed JSON document that remembers the source line of every value,
// keyed by JSON pointer, so validation errors can point at the input.
struct LocatedJson
{
  nlohmann::json doc;
  std::map<std::string, int> lines;
  std::string source;  // file name used in messages

  int LineOf(const std::string &pointer) const;
  // "<source>:<line>: <pointer>: <what>"
  std::string Where(const std::string &pointer, const std::string &what) const;
};

// Throws ValidationError with the offending line on malformed JSON or
// duplicate object keys.
LocatedJson ParseLocated(const std::string &text, const std::string &source);

}  // namespace mitmp::app

#endif  // MITMP_TOOLS_LOCATED_JSON_HPP
