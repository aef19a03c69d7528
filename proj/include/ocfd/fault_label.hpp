#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ocfd {

/// The six bridge switches. Per-phase pairing is S1/S2 = A, S3/S4 = B,
/// S5/S6 = C, odd ids on the upper arm.
enum class Switch : std::uint8_t { S1 = 1, S2, S3, S4, S5, S6 };

inline constexpr std::array<Switch, 6> kAllSwitches = {
    Switch::S1, Switch::S2, Switch::S3, Switch::S4, Switch::S5, Switch::S6};

constexpr int switch_number(Switch s) { return static_cast<int>(s); }
constexpr int phase_of(Switch s) { return (switch_number(s) - 1) / 2; }
constexpr bool is_upper(Switch s) { return switch_number(s) % 2 == 1; }
constexpr Switch upper_switch(int phase) { return static_cast<Switch>(2 * phase + 1); }
constexpr Switch lower_switch(int phase) { return static_cast<Switch>(2 * phase + 2); }

std::string to_string(Switch s);

/// Six-bit open-circuit label d1..d6. Bit k set means switch S(k) is open.
///
/// d1 is held in the most significant position so that numeric order equals
/// the lexicographic order of the printed bitstring; the healthy label
/// "000000" therefore sorts first.
class FaultLabel {
public:
    constexpr FaultLabel() = default;

    static constexpr FaultLabel normal() { return FaultLabel{}; }
    static constexpr FaultLabel from_mask(std::uint8_t mask) {
        FaultLabel l;
        l.mask_ = static_cast<std::uint8_t>(mask & 0x3F);
        return l;
    }
    static FaultLabel of(std::initializer_list<Switch> open);

    /// Parses a 6-character string of '0'/'1'. Throws std::invalid_argument.
    static FaultLabel parse(std::string_view bits);

    constexpr bool is_normal() const { return mask_ == 0; }
    constexpr bool is_open(Switch s) const { return (mask_ & bit(s)) != 0; }
    constexpr std::uint8_t mask() const { return mask_; }
    int count() const;

    constexpr FaultLabel with(Switch s) const { return from_mask(mask_ | bit(s)); }
    constexpr FaultLabel operator|(FaultLabel o) const { return from_mask(mask_ | o.mask_); }
    constexpr FaultLabel operator&(FaultLabel o) const { return from_mask(mask_ & o.mask_); }
    constexpr bool is_subset_of(FaultLabel o) const { return (mask_ & ~o.mask_) == 0; }

    std::vector<Switch> switches() const;
    std::string to_string() const;

    constexpr auto operator<=>(const FaultLabel&) const = default;

private:
    static constexpr std::uint8_t bit(Switch s) {
        return static_cast<std::uint8_t>(1u << (6 - switch_number(s)));
    }
    std::uint8_t mask_ = 0;
};

}  // namespace ocfd
