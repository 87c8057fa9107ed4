#pragma once
#include <optional>
#include <string>
#include <vector>

#include "kignn/expr.hpp"
#include "kignn/logic.hpp"

namespace kignn {

enum class CompileTarget {
    GML_LOCALSUM_RELU,
    ML_LOCALMAX_RELU,
    WGML_TOP_LOCALMAX_RELU,
    WGML_MODAL_LOCALMAX_SIGMOID,
    LDDL_LOCALMAX_SEMILINEAR,
    ISOTYPE_LOCALMAX_SEMILINEAR,
    UNIQADDR_LOCALSUM_SIGMOID,
    UNIQADDR_LOCALSUM_SEMILINEAR,
    ISOTYPE_LOCALSUM_SQUARE,
    ISOTYPE_GLOBALSUM_SEMILINEAR,
};

std::string target_name(CompileTarget t);

/* true iff the classifier only uses the primitives its target permits */
bool audit_primitives(const GnnClassifier& c, CompileTarget t);

/* logic-to-classifier translators; decisions match the module's model checker */
GnnClassifier compile_gml_localsum(const GmlPtr& f);
GnnClassifier compile_ml_localmax(const GmlPtr& f);
GnnClassifier compile_wgml_top(const GmlPtr& f);
GnnClassifier compile_wgml_modal(const GmlPtr& f);
GnnClassifier compile_lddl_semilinear(const LddlPtr& f);

/* isomorphism-type classifiers: accept keyed H^v iff the component of v
   (whole graph for the globalsum variant) is isomorphic to g */
GnnClassifier compile_isotype_localmax(const PointedGraph& g);       /* connected, <= 4 nodes */
GnnClassifier compile_isotype_localsum_square(const PointedGraph& g); /* connected, <= 3 nodes */
GnnClassifier compile_isotype_globalsum(const PointedGraph& g);      /* <= 4 nodes */

/* unique-address separators: accept iff both address lists uniquely address a
   node via a labeled walk and the two addressed nodes differ */
enum class UniqAddrMode { SIGMOID, SEMILINEAR };
GnnClassifier compile_unique_address(const std::vector<GmlPtr>& addr1,
                                     const std::vector<GmlPtr>& addr2, UniqAddrMode mode);

/* semantic oracle: the unique walk target of the address list, if any */
std::optional<int> unique_address_target(const PointedGraph& g, const std::vector<GmlPtr>& addr);

/* exactly-one-walk guard as a GML formula */
GmlPtr unique_address_guard(const std::vector<GmlPtr>& addr);

/* detector for >= 2 distinct nonzero values in a multiset of <= max_count
   nonzeros; args are (count of nonzeros, sum, sum of squares) */
ScalarFn cs_distinct_detector(int max_count);

/* named classifiers: diamond2top, q_even, triangle_complement */
GnnClassifier fixture_classifier(const std::string& name);

}  // namespace kignn
