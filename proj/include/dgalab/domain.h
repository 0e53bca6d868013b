#ifndef DGALAB_DOMAIN_H_
#define DGALAB_DOMAIN_H_

#include <compare>
#include <string>
#include <string_view>

namespace dgalab {

// A second-level label plus whatever follows the first dot. The TLD may carry
// dots of its own ("co.uk") when a source list provides it that way.
class Domain {
 public:
  // Validates and lowercases; throws Error(kMalformedDomain).
  Domain(std::string_view sld, std::string_view tld);

  const std::string& sld() const { return sld_; }
  const std::string& tld() const { return tld_; }

  std::string Render() const { return sld_ + "." + tld_; }
  std::size_t RenderedLength() const { return sld_.size() + 1 + tld_.size(); }

  friend auto operator<=>(const Domain&, const Domain&) = default;

 private:
  std::string sld_;
  std::string tld_;
};

// Splits on the first dot. Throws Error(kMalformedDomain).
Domain ParseDomain(std::string_view raw);

// True for a-z, 0-9 and '-'.
bool IsDnsChar(char c);
bool IsValidSld(std::string_view sld);
bool IsValidTld(std::string_view tld);

}  // namespace dgalab

#endif  // DGALAB_DOMAIN_H_
