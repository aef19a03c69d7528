#include "ocfd/fault_label.hpp"

#include <bit>
#include <stdexcept>

namespace ocfd {

std::string to_string(Switch s) { return "S" + std::to_string(switch_number(s)); }

FaultLabel FaultLabel::of(std::initializer_list<Switch> open) {
    FaultLabel l;
    for (Switch s : open) l = l.with(s);
    return l;
}

FaultLabel FaultLabel::parse(std::string_view bits) {
    if (bits.size() != 6) {
        throw std::invalid_argument("fault label must have 6 bits: '" + std::string(bits) + "'");
    }
    std::uint8_t mask = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("fault label must contain only 0/1: '" + std::string(bits) + "'");
        }
        mask = static_cast<std::uint8_t>((mask << 1) | (c == '1' ? 1 : 0));
    }
    return from_mask(mask);
}

int FaultLabel::count() const { return std::popcount(static_cast<unsigned>(mask_)); }

std::vector<Switch> FaultLabel::switches() const {
    std::vector<Switch> out;
    for (Switch s : kAllSwitches) {
        if (is_open(s)) out.push_back(s);
    }
    return out;
}

std::string FaultLabel::to_string() const {
    std::string s(6, '0');
    for (int k = 0; k < 6; ++k) {
        if (mask_ & (1u << (5 - k))) s[k] = '1';
    }
    return s;
}

}  // namespace ocfd
