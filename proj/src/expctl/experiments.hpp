#pragma once

#include "prefdens/expctl.hpp"

namespace prefdens::expctl::detail {

Schema reward_schema();
void reward_body(RunContext& ctx);

Schema dpo_well_schema();
void dpo_well_body(RunContext& ctx);
Schema poe_schema();
void poe_body(RunContext& ctx);
Schema geometric_schema();
void geometric_body(RunContext& ctx);

Schema misspec_schema();
void misspec_body(RunContext& ctx);
Schema mixturefix_schema();
void mixturefix_body(RunContext& ctx);

Schema loss_zoo_schema();
void loss_zoo_body(RunContext& ctx);

Schema seq_schema();
void seq_bias_body(RunContext& ctx);
void seq_misspec_body(RunContext& ctx);

}  // namespace prefdens::expctl::detail
