use std::ffi::CStr;
use std::ptr;

use lorawan_lab_ffi::*;

#[test]
fn airtime_and_limits() {
    let mut t = 0.0;
    let status = unsafe { lw_frame_airtime(7, 125_000, 1, 8, 13, &mut t) };
    assert_eq!(status, LwStatus::Ok);
    assert!((t - 0.046336).abs() < 1e-12);

    assert_eq!(
        unsafe { lw_frame_airtime(13, 125_000, 1, 8, 13, &mut t) },
        LwStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { lw_frame_airtime(7, 125_000, 1, 8, 13, ptr::null_mut()) },
        LwStatus::NullPointer
    );

    let mut frames = 0u64;
    assert_eq!(
        unsafe { lw_frames_per_day(7, 13, 0.01, &mut frames) },
        LwStatus::Ok
    );
    assert_eq!(frames, 18646);
    assert_eq!(
        unsafe { lw_frames_per_day(10, 60, 0.01, &mut frames) },
        LwStatus::PayloadTooLarge
    );

    let mut bps = 0u32;
    assert_eq!(
        unsafe { lw_indicative_bitrate(7, 250_000, &mut bps) },
        LwStatus::Ok
    );
    assert_eq!(bps, 11_000);
}

#[test]
fn distances() {
    let mut d = 0.0;
    assert_eq!(
        unsafe { lw_estimate_distance(868.1, -100.0, &mut d) },
        LwStatus::Ok
    );
    assert!((d - 2747.0).abs() <= 1.0);
    assert_eq!(
        unsafe { lw_estimate_distance(0.0, -100.0, &mut d) },
        LwStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { lw_great_circle_distance(52.0, 4.36, 52.01, 4.36, &mut d) },
        LwStatus::Ok
    );
    assert!((d - 1111.9).abs() <= 1.0);
}

#[test]
fn simulation_handles() {
    unsafe {
        let cfg = lw_sim_config_new();
        assert_eq!(lw_sim_config_set_packets(cfg, 200), LwStatus::Ok);
        assert_eq!(
            lw_sim_config_set_confirmed_fraction(cfg, 0.05),
            LwStatus::Ok
        );
        assert_eq!(lw_sim_config_set_trials(cfg, 20), LwStatus::Ok);
        assert_eq!(lw_sim_config_set_seed(cfg, 9), LwStatus::Ok);

        let mut report = ptr::null_mut();
        assert_eq!(lw_simulate(cfg, &mut report), LwStatus::Ok);
        let mut summary = LwSimSummary::default();
        assert_eq!(lw_sim_report_summary(report, &mut summary), LwStatus::Ok);
        assert_eq!(summary.total_uplinks, 4000);
        assert_eq!(
            summary.delivered + summary.collided + summary.lost_gateway_busy,
            summary.total_uplinks
        );
        assert!(summary.acks_sent > 0);
        assert!(summary.duty_violation);

        let mut rate = -1.0;
        assert_eq!(
            lw_sim_report_collision_rate(report, 12, &mut rate),
            LwStatus::Ok
        );
        assert!((0.0..=1.0).contains(&rate));
        assert_eq!(
            lw_sim_report_collision_rate(report, 6, &mut rate),
            LwStatus::InvalidArgument
        );
        lw_sim_report_free(report);

        assert_eq!(lw_sim_config_set_confirmed_fraction(cfg, 2.0), LwStatus::Ok);
        assert_eq!(lw_simulate(cfg, &mut report), LwStatus::InvalidArgument);
        assert!(report.is_null());
        lw_sim_config_free(cfg);

        assert_eq!(
            lw_sim_config_set_seed(ptr::null_mut(), 1),
            LwStatus::NullPointer
        );
        lw_sim_config_free(ptr::null_mut());
    }
}

fn hex(s: &str) -> Vec<u8> {
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
        .collect()
}

#[test]
fn decode_handles() {
    let raw = hex("40da1b012600010001ea9655037bcdf61da5");
    unsafe {
        let mut frame = ptr::null_mut();
        assert_eq!(
            lw_decode(raw.as_ptr(), raw.len(), ptr::null(), &mut frame),
            LwStatus::Ok
        );
        assert_eq!(lw_frame_dev_addr(frame), 0x2601_1BDA);
        assert_eq!(lw_frame_fcnt(frame), 1);
        assert_eq!(lw_frame_fport(frame), 1);
        assert!(lw_frame_mic_ok(frame));

        let mut len = 0usize;
        let mut small = [0u8; 2];
        assert_eq!(
            lw_frame_plaintext(frame, small.as_mut_ptr(), small.len(), &mut len),
            LwStatus::BufferTooSmall
        );
        assert_eq!(len, 5);
        let mut buf = [0u8; 16];
        assert_eq!(
            lw_frame_plaintext(frame, buf.as_mut_ptr(), buf.len(), &mut len),
            LwStatus::Ok
        );
        assert_eq!(&buf[..len], b"hello");
        lw_frame_free(frame);

        let wrong_key = [0u8; 16];
        assert_eq!(
            lw_decode(raw.as_ptr(), raw.len(), wrong_key.as_ptr(), &mut frame),
            LwStatus::Ok
        );
        assert!(!lw_frame_mic_ok(frame));
        lw_frame_free(frame);

        assert_eq!(
            lw_decode(raw.as_ptr(), 5, ptr::null(), &mut frame),
            LwStatus::ParseError
        );
        assert!(frame.is_null());
        let join = [0u8; 23];
        assert_eq!(
            lw_decode(join.as_ptr(), join.len(), ptr::null(), &mut frame),
            LwStatus::NotDataFrame
        );
        assert_eq!(lw_frame_fport(ptr::null()), -1);
    }
}

#[test]
fn status_messages() {
    let msg = unsafe { CStr::from_ptr(lw_status_message(LwStatus::ParseError)) };
    assert_eq!(msg.to_str().unwrap(), "frame could not be parsed");
    let version = unsafe { CStr::from_ptr(lw_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
