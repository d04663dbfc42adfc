use lorawan_lab::codec::*;
use proptest::prelude::*;

fn hex(s: &str) -> Vec<u8> {
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
        .collect()
}

prop_compose! {
    fn data_frame()(
        confirmed in any::<bool>(),
        major in 0u8..4,
        dev_addr in any::<u32>(),
        fctrl_flags in 0u8..16,
        fcnt in any::<u16>(),
        fopts in prop::collection::vec(any::<u8>(), 0..=15),
        body in prop::option::of((any::<u8>(), prop::collection::vec(any::<u8>(), 0..64))),
        mic in any::<[u8; 4]>(),
    ) -> DataFrame {
        let mtype = if confirmed { MType::ConfirmedDataUp } else { MType::UnconfirmedDataUp };
        let (fport, frm_payload) = match body {
            Some((p, payload)) => (Some(p), payload),
            None => (None, Vec::new()),
        };
        DataFrame {
            mhdr: Mhdr::new(mtype, major),
            dev_addr,
            fctrl: FCtrl((fctrl_flags << 4) | fopts.len() as u8),
            fcnt,
            fopts,
            fport,
            frm_payload,
            mic,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn serialize_then_parse_is_identity(frame in data_frame()) {
        let bytes = frame.to_bytes();
        let parsed = parse_phy_payload(&bytes).unwrap();
        prop_assert_eq!(parsed.as_data(), Some(&frame));
    }

    #[test]
    fn parse_then_serialize_is_identity(raw in prop::collection::vec(any::<u8>(), 0..80)) {
        if let Ok(frame) = parse_phy_payload(&raw) {
            prop_assert_eq!(frame.to_bytes(), raw);
        }
    }

    #[test]
    fn keystream_is_an_involution(frame in data_frame(), key in any::<[u8; 16]>()) {
        let once = frame.apply_keystream(&key, &frame.frm_payload);
        prop_assert_eq!(once.len(), frame.frm_payload.len());
        prop_assert_eq!(frame.apply_keystream(&key, &once), frame.frm_payload.clone());
    }

    #[test]
    fn encode_decode_round_trips(
        dev_addr in any::<u32>(),
        fcnt in any::<u16>(),
        fport in 1u8..=223,
        plaintext in prop::collection::vec(any::<u8>(), 0..100),
        confirmed in any::<bool>(),
    ) {
        let raw = encode_uplink(confirmed, dev_addr, fcnt, fport, &plaintext, &SessionKeys::generic());
        let d = decode_generic(&raw).unwrap();
        prop_assert!(d.mic_ok);
        prop_assert_eq!(d.plaintext, plaintext);
        prop_assert_eq!(d.frame.dev_addr, dev_addr);
        prop_assert_eq!(d.frame.fcnt, fcnt);
    }
}

#[test]
fn every_single_byte_mutation_is_rejected() {
    let raw = encode_uplink(
        false,
        0x2601_1BDA,
        42,
        3,
        b"temp=21.5,hum=40.",
        &SessionKeys::generic(),
    );
    assert_eq!(raw.len(), 30);
    assert!(decode_generic(&raw).unwrap().mic_ok);
    let mut tried = 0;
    for pos in 0..raw.len() {
        for delta in 1..=255u8 {
            let mut m = raw.clone();
            m[pos] ^= delta;
            let accepted = decode_generic(&m).is_ok_and(|d| d.mic_ok);
            assert!(!accepted, "mutation at {pos} xor {delta:#04x} verified");
            tried += 1;
        }
    }
    assert_eq!(tried, 30 * 255);
}

#[test]
fn independent_vectors() {
    // produced with a separate AES-CMAC implementation
    let d = decode_generic(&hex(
        "80040302018334120203040abca5ed5704ecda704c00f541952e93e2a2f7",
    ))
    .unwrap();
    assert!(d.mic_ok);
    assert_eq!(d.frame.mhdr.mtype(), MType::ConfirmedDataUp);
    assert_eq!(d.frame.dev_addr, 0x0102_0304);
    assert_eq!(d.frame.fctrl, FCtrl(0x83));
    assert_eq!(d.frame.fcnt, 0x1234);
    assert_eq!(d.frame.fopts, vec![2, 3, 4]);
    assert_eq!(d.frame.fport, Some(10));
    assert_eq!(d.plaintext, b"52.0116,4.3571");

    let long = hex(concat!(
        "40efbeadde80ffff02c5265022bef82b4286656d669e8e3730fac1606e80c5cc",
        "776397ed2c73359a87958631626ae9570df0c8346f"
    ));
    let d = decode_generic(&long).unwrap();
    assert!(d.mic_ok);
    assert_eq!(d.frame.dev_addr, 0xDEAD_BEEF);
    assert_eq!(d.frame.fcnt, 0xFFFF);
    assert_eq!(d.plaintext, (0u8..40).collect::<Vec<_>>());

    let mut rebuilt = DataFrame::uplink(
        false,
        0xDEAD_BEEF,
        0xFFFF,
        Vec::new(),
        Some(2),
        (0u8..40).collect(),
    );
    rebuilt.fctrl = FCtrl(0x80);
    rebuilt.encrypt(&GENERIC_KEY);
    rebuilt.sign(&GENERIC_KEY);
    assert_eq!(rebuilt.to_bytes(), long);

    let d = decode_generic(&hex("40da1b0126000700f035f5c9")).unwrap();
    assert!(d.mic_ok);
    assert_eq!(d.frame.fport, None);
    assert!(d.plaintext.is_empty());
}

#[test]
fn wrong_key_fails_mic_and_garbles_plaintext() {
    let raw = hex("40da1b012600010001ea9655037bcdf61da5");
    let d = decode_with(&raw, &SessionKeys::shared([0x11; 16])).unwrap();
    assert!(!d.mic_ok);
    assert_ne!(d.plaintext, b"hello");
    assert_eq!(decode_generic(&raw).unwrap().plaintext, b"hello");
}

#[test]
fn join_frames_are_opaque() {
    let mut raw = vec![0x00];
    raw.extend([0u8; 22]);
    let f = parse_phy_payload(&raw).unwrap();
    assert!(f.as_data().is_none());
    assert_eq!(f.to_bytes(), raw);
    assert!(matches!(
        decode_generic(&raw),
        Err(CodecError::NotDataFrame(_))
    ));
}
