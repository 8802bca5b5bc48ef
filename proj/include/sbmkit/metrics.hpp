#pragma once

#include "sbmkit/types.hpp"

namespace sbmkit {

// R_ka = fraction of nodes with e_i = k and c_i = a. Entries sum to 1.
Matrix confusion(const Labeling& e, const Labeling& c);

// Mutual information of the confusion matrix normalized by its joint entropy
// (natural logs, 0 log 0 = 0). 1 iff the labelings agree up to permutation;
// 0 when either labeling is constant and the other is not. Both constant
// (zero joint entropy) counts as agreement and returns 1.
double nmi(const Labeling& e, const Labeling& c);

// Fraction of misclassified nodes minimized over relabelings of pred.
// Exhaustive over permutations for k <= 8, exact assignment above that.
double mismatch_ratio(const Labeling& pred, const Labeling& truth);

}  // namespace sbmkit
