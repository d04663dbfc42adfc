/* Build: cargo build -p lorawan-lab-ffi
 *        cc examples/smoke.c -Iinclude -L../../target/debug -l:liblorawan_lab_ffi.a -lm -lpthread -ldl -o smoke
 */
#include <stdio.h>
#include "lorawan_lab.h"

int main(void) {
    double airtime = 0.0;
    LwStatus st = lw_frame_airtime(7, 125000, 1, 8, 13, &airtime);
    if (st != LW_STATUS_OK) {
        fprintf(stderr, "%s\n", lw_status_message(st));
        return 1;
    }
    printf("airtime SF7/13B: %.3f ms\n", airtime * 1000.0);

    LwSimConfig *cfg = lw_sim_config_new();
    lw_sim_config_set_packets(cfg, 700);
    lw_sim_config_set_confirmed_fraction(cfg, 0.005);
    lw_sim_config_set_trials(cfg, 200);
    LwSimReport *report = NULL;
    st = lw_simulate(cfg, &report);
    if (st == LW_STATUS_OK) {
        LwSimSummary s;
        lw_sim_report_summary(report, &s);
        printf("gateway airtime: %.3f%% (violation: %s)\n",
               s.gateway_airtime_fraction * 100.0, s.duty_violation ? "yes" : "no");
    }
    lw_sim_report_free(report);
    lw_sim_config_free(cfg);
    return st == LW_STATUS_OK ? 0 : 1;
}
