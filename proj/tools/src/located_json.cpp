#include "located_json.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>
#include <set>
#include <vector>

#include "mitmp/errors.hpp"

namespace mitmp::app
{

namespace
{

using nlohmann::json;

struct Position
{
  int line = 1;
  int last_token_line = 1;
};

// Character iterator that tracks the line of the last non-blank character
// handed to the parser. The lexer only looks one blank ahead, so this is the
// line on which the current token ends.
class CountingIterator
{
public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char *;
  using reference = const char &;

  CountingIterator(const char *p, Position *pos) : p_(p), pos_(pos) {}

  reference operator*() const { return *p_; }
  CountingIterator &operator++()
  {
    if (*p_ == '\n')
    {
      pos_->line++;
    }
    else if (!std::isspace(static_cast<unsigned char>(*p_)))
    {
      pos_->last_token_line = pos_->line;
    }
    ++p_;
    return *this;
  }
  bool operator==(const CountingIterator &o) const { return p_ == o.p_; }
  bool operator!=(const CountingIterator &o) const { return p_ != o.p_; }

private:
  const char *p_;
  Position *pos_;
};

std::string Escape(const std::string &key)
{
  std::string out;
  for (char c : key)
  {
    if (c == '~')
    {
      out += "~0";
    }
    else if (c == '/')
    {
      out += "~1";
    }
    else
    {
      out += c;
    }
  }
  return out;
}

class LocatingSax : public nlohmann::detail::json_sax_dom_parser<json>
{
  using Base = nlohmann::detail::json_sax_dom_parser<json>;

  struct Frame
  {
    std::string pointer;
    bool is_array;
    std::size_t next_index = 0;
    std::string key;
    std::set<std::string> seen;
  };

public:
  LocatingSax(json &doc, LocatedJson &out, const Position &pos)
    : Base(doc, true), out_(out), pos_(pos)
  {
  }

  bool null() { return Value() && Base::null(); }
  bool boolean(bool v) { return Value() && Base::boolean(v); }
  bool number_integer(json::number_integer_t v) { return Value() && Base::number_integer(v); }
  bool number_unsigned(json::number_unsigned_t v) { return Value() && Base::number_unsigned(v); }
  bool number_float(json::number_float_t v, const std::string &s)
  {
    return Value() && Base::number_float(v, s);
  }
  bool string(json::string_t &v) { return Value() && Base::string(v); }
  bool binary(json::binary_t &v) { return Value() && Base::binary(v); }

  bool start_object(std::size_t n)
  {
    const std::string p = Record();
    frames_.push_back({p, false, 0, {}, {}});
    return Base::start_object(n);
  }
  bool key(json::string_t &k)
  {
    Frame &f = frames_.back();
    if (!f.seen.insert(k).second)
    {
      throw ValidationError(out_.source + ":" + std::to_string(pos_.last_token_line) +
                            ": duplicate key \"" + k + "\"");
    }
    f.key = k;
    out_.lines.emplace(f.pointer + "/" + Escape(k), pos_.last_token_line);
    return Base::key(k);
  }
  bool end_object()
  {
    frames_.pop_back();
    return Base::end_object();
  }
  bool start_array(std::size_t n)
  {
    const std::string p = Record();
    frames_.push_back({p, true, 0, {}, {}});
    return Base::start_array(n);
  }
  bool end_array()
  {
    frames_.pop_back();
    return Base::end_array();
  }

private:
  bool Value()
  {
    Record();
    return true;
  }
  // Records the pointer of the value about to be produced and returns it.
  std::string Record()
  {
    std::string p;
    if (!frames_.empty())
    {
      Frame &f = frames_.back();
      p = f.pointer + "/" + (f.is_array ? std::to_string(f.next_index++) : Escape(f.key));
    }
    out_.lines.emplace(p, pos_.last_token_line);
    return p;
  }

  LocatedJson &out_;
  const Position &pos_;
  std::vector<Frame> frames_;
};

}  // namespace

int LocatedJson::LineOf(const std::string &pointer) const
{
  // fall back to the closest located ancestor
  std::string p = pointer;
  while (true)
  {
    if (auto it = lines.find(p); it != lines.end())
    {
      return it->second;
    }
    if (p.empty())
    {
      return 1;
    }
    p.erase(p.rfind('/'));
  }
}

std::string LocatedJson::Where(const std::string &pointer, const std::string &what) const
{
  return source + ":" + std::to_string(LineOf(pointer)) + ": " +
         (pointer.empty() ? std::string("/") : pointer) + ": " + what;
}

LocatedJson ParseLocated(const std::string &text, const std::string &source)
{
  LocatedJson out;
  out.source = source;
  Position pos;
  LocatingSax sax(out.doc, out, pos);
  const char *begin = text.data();
  try
  {
    json::sax_parse(CountingIterator(begin, &pos), CountingIterator(begin + text.size(), &pos),
                    &sax);
  }
  catch (const json::parse_error &e)
  {
    // byte offset -> line
    const std::size_t at = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + at, '\n'));
    std::string what = e.what();
    if (auto colon = what.find("syntax error"); colon != std::string::npos)
    {
      what = what.substr(colon);
    }
    throw ValidationError(source + ":" + std::to_string(line) + ": invalid JSON: " + what);
  }
  return out;
}

}  // namespace mitmp::app
