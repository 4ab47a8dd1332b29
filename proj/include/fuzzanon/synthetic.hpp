#pragma once

#include <cstddef>
#include <cstdint>

#include "fuzzanon/data_model.hpp"

namespace fuzzanon::synthetic {

/// Census-income style schema: 15 columns, 3 sensitive (race, occupation, income),
/// 2 quasi (age, sex), 10 non-sensitive.
Schema adults_schema();

/// Bank-marketing style schema: 17 columns, 1 identifier (contact), 3 sensitive
/// (balance, loan, job), 1 quasi (age), 12 non-sensitive.
Schema bank_schema();

/// Deterministic synthetic records drawn from marginals resembling the public datasets.
/// Unknown categorical values are Missing, as "?" cells would load.
DataTable adults(std::size_t rows, std::uint64_t seed = 1994);
DataTable bank(std::size_t rows, std::uint64_t seed = 2012);

inline constexpr std::size_t kAdultsRows = 32561;
inline constexpr std::size_t kBankRows = 4521;

}  // namespace fuzzanon::synthetic
