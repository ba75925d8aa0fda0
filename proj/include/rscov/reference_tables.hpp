#pragma once

#include <array>

namespace rscov {

// Published benchmark results that the `reproduce` command and the acceptance
// suite compare against. One row per test problem; table 1 targets the
// expectation form of the unconditional PCS, table 2 the minimum form.
struct ReferenceRow {
    const char* label;
    double h_hom;
    double sample_hom;
    double pcs_e_hom;
    double pcs_min_hom;
    double h_het;
    double sample_het;
    double pcs_e_het;
    double pcs_min_het;
};

inline constexpr std::array<ReferenceRow, 9> kReferenceTable1 = {{
    {"(0) benchmark", 3.423, 46865, 0.9610, 0.7439, 4.034, 65138, 0.9801, 0.8080},
    {"(1) k=2", 2.363, 8947, 0.9501, 0.8084, 2.781, 12380, 0.9702, 0.8517},
    {"(2) k=8", 3.822, 93542, 0.9650, 0.7246, 4.510, 130200, 0.9842, 0.8052},
    {"(3) non-GSC", 3.423, 46865, 0.9987, 0.9410, 4.034, 65138, 0.9994, 0.9615},
    {"(4) IV", 3.423, 52698, 0.9618, 0.7549, 4.034, 73265, 0.9807, 0.8147},
    {"(5) DV", 3.423, 52720, 0.9614, 0.7501, 4.034, 73246, 0.9806, 0.8114},
    {"(6) het", 3.423, 58626, 0.9232, 0.6336, 4.034, 81555, 0.9846, 0.8591},
    {"(7) d=1", 4.612, 21288, 0.9593, 0.7941, 4.924, 24266, 0.9662, 0.8223},
    {"(8) d=5", 2.141, 73428, 0.9656, 0.7446, 2.710, 117630, 0.9895, 0.8379},
}};

inline constexpr std::array<ReferenceRow, 9> kReferenceTable2 = {{
    {"(0) benchmark", 5.927, 140540, 0.9989, 0.9594, 6.990, 195340, 0.9997, 0.9825},
    {"(1) k=2", 4.362, 30447, 0.9958, 0.9466, 5.132, 42164, 0.9987, 0.9701},
    {"(2) k=8", 6.481, 268750, 0.9993, 0.9642, 7.651, 374720, 0.9999, 0.9849},
    {"(3) non-GSC", 5.927, 140540, 1.0000, 0.9958, 6.990, 195340, 1.0000, 0.9981},
    {"(4) IV", 5.927, 158140, 0.9989, 0.9574, 6.990, 219870, 0.9998, 0.9862},
    {"(5) DV", 5.927, 158100, 0.9990, 0.9617, 6.990, 219740, 0.9998, 0.9826},
    {"(6) het", 5.927, 175700, 0.9952, 0.8999, 6.990, 244490, 0.9999, 0.9899},
    {"(7) d=1", 7.155, 51161, 0.9954, 0.9600, 7.648, 58493, 0.9971, 0.9708},
    {"(8) d=5", 3.792, 230220, 0.9994, 0.9539, 4.804, 369310, 1.0000, 0.9907},
}};

}  // namespace rscov
