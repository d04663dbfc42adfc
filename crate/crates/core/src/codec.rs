//! LoRaWAN 1.0 PHY payload parsing, MIC verification and FRMPayload
//! decryption.
//!
//! Layout of a data frame:
//!
//! ```text
//! MHDR(1) | DevAddr(4, LE) | FCtrl(1) | FCnt(2, LE) | FOpts(0..15) | [FPort(1) | FRMPayload] | MIC(4)
//! ```
//!
//! The MIC is the first four bytes of AES-128 CMAC over a B0 block followed by
//! everything before the MIC. FRMPayload is XORed with a keystream of AES
//! encrypted A blocks.

use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes128;
use cmac::{Cmac, Mac};
use serde::Serialize;
use thiserror::Error;

/// Default Semtech session key used by generic ABP devices for both
/// NwkSKey and AppSKey.
pub const GENERIC_KEY: [u8; 16] = [
    0x2B, 0x7E, 0x15, 0x16, 0x28, 0xAE, 0xD2, 0xA6, 0xAB, 0xF7, 0x15, 0x88, 0x09, 0xCF, 0x4F, 0x3C,
];

pub const MIN_FRAME_LEN: usize = 12;
const MIC_LEN: usize = 4;
const FHDR_LEN: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("frame of {0} bytes is shorter than the 12-byte minimum")]
    Truncated(usize),
    #[error("FOpts length {fopts_len} exceeds the {available} bytes left before the MIC")]
    Malformed { fopts_len: usize, available: usize },
    #[error("frame carries no FPort, nothing to decrypt")]
    NoPayload,
    #[error("frame is not a data frame ({0:?})")]
    NotDataFrame(MType),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MType {
    JoinRequest,
    JoinAccept,
    UnconfirmedDataUp,
    UnconfirmedDataDown,
    ConfirmedDataUp,
    ConfirmedDataDown,
    Rfu,
    Proprietary,
}

impl MType {
    fn from_bits(bits: u8) -> Self {
        match bits & 0x07 {
            0 => MType::JoinRequest,
            1 => MType::JoinAccept,
            2 => MType::UnconfirmedDataUp,
            3 => MType::UnconfirmedDataDown,
            4 => MType::ConfirmedDataUp,
            5 => MType::ConfirmedDataDown,
            6 => MType::Rfu,
            _ => MType::Proprietary,
        }
    }

    pub fn is_data(self) -> bool {
        matches!(
            self,
            MType::UnconfirmedDataUp
                | MType::UnconfirmedDataDown
                | MType::ConfirmedDataUp
                | MType::ConfirmedDataDown
        )
    }

    pub fn direction(self) -> Option<Dir> {
        match self {
            MType::UnconfirmedDataUp | MType::ConfirmedDataUp => Some(Dir::Up),
            MType::UnconfirmedDataDown | MType::ConfirmedDataDown => Some(Dir::Down),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Dir {
    Up,
    Down,
}

impl Dir {
    fn byte(self) -> u8 {
        match self {
            Dir::Up => 0,
            Dir::Down => 1,
        }
    }
}

/// MAC header byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Mhdr(pub u8);

impl Mhdr {
    pub fn new(mtype: MType, major: u8) -> Self {
        let bits = match mtype {
            MType::JoinRequest => 0,
            MType::JoinAccept => 1,
            MType::UnconfirmedDataUp => 2,
            MType::UnconfirmedDataDown => 3,
            MType::ConfirmedDataUp => 4,
            MType::ConfirmedDataDown => 5,
            MType::Rfu => 6,
            MType::Proprietary => 7,
        };
        Mhdr(bits << 5 | (major & 0x03))
    }

    pub fn mtype(self) -> MType {
        MType::from_bits(self.0 >> 5)
    }

    pub fn major(self) -> u8 {
        self.0 & 0x03
    }

    /// Only major version 0 (LoRaWAN R1) is understood.
    pub fn is_lorawan_r1(self) -> bool {
        self.major() == 0
    }
}

/// Frame control byte of an uplink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FCtrl(pub u8);

impl FCtrl {
    pub fn adr(self) -> bool {
        self.0 & 0x80 != 0
    }

    pub fn adr_ack_req(self) -> bool {
        self.0 & 0x40 != 0
    }

    pub fn ack(self) -> bool {
        self.0 & 0x20 != 0
    }

    /// Frame pending on downlinks, class B on uplinks.
    pub fn pending(self) -> bool {
        self.0 & 0x10 != 0
    }

    pub fn fopts_len(self) -> usize {
        usize::from(self.0 & 0x0F)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DataFrame {
    pub mhdr: Mhdr,
    pub dev_addr: u32,
    pub fctrl: FCtrl,
    pub fcnt: u16,
    pub fopts: Vec<u8>,
    pub fport: Option<u8>,
    pub frm_payload: Vec<u8>,
    pub mic: [u8; 4],
}

/// A parsed PHY payload. Join and proprietary frames are kept as opaque bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum PhyFrame {
    Data(DataFrame),
    Opaque { mhdr: Mhdr, body: Vec<u8> },
}

impl PhyFrame {
    pub fn mhdr(&self) -> Mhdr {
        match self {
            PhyFrame::Data(f) => f.mhdr,
            PhyFrame::Opaque { mhdr, .. } => *mhdr,
        }
    }

    pub fn as_data(&self) -> Option<&DataFrame> {
        match self {
            PhyFrame::Data(f) => Some(f),
            PhyFrame::Opaque { .. } => None,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            PhyFrame::Data(f) => f.to_bytes(),
            PhyFrame::Opaque { mhdr, body } => {
                let mut out = Vec::with_capacity(1 + body.len());
                out.push(mhdr.0);
                out.extend_from_slice(body);
                out
            }
        }
    }
}

pub fn parse_phy_payload(raw: &[u8]) -> Result<PhyFrame, CodecError> {
    if raw.len() < MIN_FRAME_LEN {
        return Err(CodecError::Truncated(raw.len()));
    }
    let mhdr = Mhdr(raw[0]);
    if !mhdr.mtype().is_data() {
        return Ok(PhyFrame::Opaque {
            mhdr,
            body: raw[1..].to_vec(),
        });
    }
    let dev_addr = u32::from_le_bytes([raw[1], raw[2], raw[3], raw[4]]);
    let fctrl = FCtrl(raw[5]);
    let fcnt = u16::from_le_bytes([raw[6], raw[7]]);
    let mic_at = raw.len() - MIC_LEN;
    let fopts_end = 1 + FHDR_LEN + fctrl.fopts_len();
    if fopts_end > mic_at {
        return Err(CodecError::Malformed {
            fopts_len: fctrl.fopts_len(),
            available: mic_at - (1 + FHDR_LEN),
        });
    }
    let (fport, frm_payload) = if fopts_end < mic_at {
        (Some(raw[fopts_end]), raw[fopts_end + 1..mic_at].to_vec())
    } else {
        (None, Vec::new())
    };
    let mut mic = [0u8; 4];
    mic.copy_from_slice(&raw[mic_at..]);
    Ok(PhyFrame::Data(DataFrame {
        mhdr,
        dev_addr,
        fctrl,
        fcnt,
        fopts: raw[1 + FHDR_LEN..fopts_end].to_vec(),
        fport,
        frm_payload,
        mic,
    }))
}

impl DataFrame {
    /// Unsigned uplink with the given plaintext, not yet encrypted or signed.
    /// FCtrl's FOpts length nibble is taken from `fopts`.
    pub fn uplink(
        confirmed: bool,
        dev_addr: u32,
        fcnt: u16,
        fopts: Vec<u8>,
        fport: Option<u8>,
        frm_payload: Vec<u8>,
    ) -> Self {
        assert!(fopts.len() <= 15, "FOpts holds at most 15 bytes");
        let mtype = if confirmed {
            MType::ConfirmedDataUp
        } else {
            MType::UnconfirmedDataUp
        };
        Self {
            mhdr: Mhdr::new(mtype, 0),
            dev_addr,
            fctrl: FCtrl(fopts.len() as u8),
            fcnt,
            fopts,
            fport,
            frm_payload,
            mic: [0; 4],
        }
    }

    pub fn direction(&self) -> Dir {
        self.mhdr.mtype().direction().unwrap_or(Dir::Up)
    }

    /// Everything covered by the MIC.
    fn message(&self) -> Vec<u8> {
        let mut out =
            Vec::with_capacity(1 + FHDR_LEN + self.fopts.len() + 1 + self.frm_payload.len());
        out.push(self.mhdr.0);
        out.extend_from_slice(&self.dev_addr.to_le_bytes());
        out.push(self.fctrl.0);
        out.extend_from_slice(&self.fcnt.to_le_bytes());
        out.extend_from_slice(&self.fopts);
        if let Some(port) = self.fport {
            out.push(port);
            out.extend_from_slice(&self.frm_payload);
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.message();
        out.extend_from_slice(&self.mic);
        out
    }

    pub fn compute_mic(&self, nwk_s_key: &[u8; 16]) -> [u8; 4] {
        let msg = self.message();
        let mut b0 = self.block(0x49);
        b0[15] = msg.len() as u8;
        let mut mac =
            <Cmac<Aes128> as Mac>::new_from_slice(nwk_s_key).expect("AES-128 key is 16 bytes");
        mac.update(&b0);
        mac.update(&msg);
        let tag = mac.finalize().into_bytes();
        [tag[0], tag[1], tag[2], tag[3]]
    }

    pub fn sign(&mut self, nwk_s_key: &[u8; 16]) {
        self.mic = self.compute_mic(nwk_s_key);
    }

    /// B0 / A-block prefix shared by MIC and encryption.
    fn block(&self, tag: u8) -> [u8; 16] {
        let mut b = [0u8; 16];
        b[0] = tag;
        b[5] = self.direction().byte();
        b[6..10].copy_from_slice(&self.dev_addr.to_le_bytes());
        b[10..14].copy_from_slice(&u32::from(self.fcnt).to_le_bytes());
        b
    }

    /// XORs `data` with the FRMPayload keystream. Applying it twice is the
    /// identity.
    pub fn apply_keystream(&self, key: &[u8; 16], data: &[u8]) -> Vec<u8> {
        let cipher = Aes128::new(key.into());
        let mut out = Vec::with_capacity(data.len());
        for (i, chunk) in data.chunks(16).enumerate() {
            let mut a = self.block(0x01);
            a[15] = (i + 1) as u8;
            let mut block = a.into();
            cipher.encrypt_block(&mut block);
            out.extend(chunk.iter().zip(block.iter()).map(|(d, s)| d ^ s));
        }
        out
    }

    /// Replaces the plaintext FRMPayload with its ciphertext.
    pub fn encrypt(&mut self, key: &[u8; 16]) {
        self.frm_payload = self.apply_keystream(key, &self.frm_payload);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionKeys {
    pub nwk_s_key: [u8; 16],
    pub app_s_key: [u8; 16],
}

impl SessionKeys {
    /// Generic-device convention: AppSKey equals NwkSKey.
    pub fn generic() -> Self {
        Self::shared(GENERIC_KEY)
    }

    pub fn shared(key: [u8; 16]) -> Self {
        Self {
            nwk_s_key: key,
            app_s_key: key,
        }
    }

    /// FPort 0 carries MAC commands encrypted with the network key.
    pub fn payload_key(&self, fport: u8) -> &[u8; 16] {
        if fport == 0 {
            &self.nwk_s_key
        } else {
            &self.app_s_key
        }
    }
}

pub fn verify_mic(frame: &DataFrame, nwk_s_key: &[u8; 16]) -> bool {
    frame.compute_mic(nwk_s_key) == frame.mic
}

pub fn decrypt_frm_payload(frame: &DataFrame, app_s_key: &[u8; 16]) -> Result<Vec<u8>, CodecError> {
    if frame.fport.is_none() {
        return Err(CodecError::NoPayload);
    }
    Ok(frame.apply_keystream(app_s_key, &frame.frm_payload))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub frame: DataFrame,
    /// Empty when the frame has no FPort.
    pub plaintext: Vec<u8>,
    pub mic_ok: bool,
}

/// Parses, checks and decrypts a data frame under `keys`. A bad MIC is
/// reported, not refused.
pub fn decode_with(raw: &[u8], keys: &SessionKeys) -> Result<Decoded, CodecError> {
    let frame = match parse_phy_payload(raw)? {
        PhyFrame::Data(f) => f,
        PhyFrame::Opaque { mhdr, .. } => return Err(CodecError::NotDataFrame(mhdr.mtype())),
    };
    let mic_ok = verify_mic(&frame, &keys.nwk_s_key);
    let plaintext = match frame.fport {
        Some(port) => frame.apply_keystream(keys.payload_key(port), &frame.frm_payload),
        None => Vec::new(),
    };
    Ok(Decoded {
        frame,
        plaintext,
        mic_ok,
    })
}

pub fn decode_generic(raw: &[u8]) -> Result<Decoded, CodecError> {
    decode_with(raw, &SessionKeys::generic())
}

/// Builds a signed, encrypted uplink under `keys`.
pub fn encode_uplink(
    confirmed: bool,
    dev_addr: u32,
    fcnt: u16,
    fport: u8,
    plaintext: &[u8],
    keys: &SessionKeys,
) -> Vec<u8> {
    let mut frame = DataFrame::uplink(
        confirmed,
        dev_addr,
        fcnt,
        Vec::new(),
        Some(fport),
        plaintext.to_vec(),
    );
    frame.encrypt(keys.payload_key(fport));
    frame.sign(&keys.nwk_s_key);
    frame.to_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex(s: &str) -> Vec<u8> {
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
            .collect()
    }

    // Generated with a separate AES/CMAC implementation under the generic key.
    const HELLO: &str = "40da1b012600010001ea9655037bcdf61da5";
    const NO_PORT: &str = "40da1b0126000700f035f5c9";

    #[test]
    fn too_short() {
        assert_eq!(
            parse_phy_payload(&[0x40; 11]),
            Err(CodecError::Truncated(11))
        );
        assert_eq!(parse_phy_payload(&[0x40; 5]), Err(CodecError::Truncated(5)));
    }

    #[test]
    fn fopts_overrun() {
        let mut raw = hex(NO_PORT);
        raw[5] = 0x03;
        assert_eq!(
            parse_phy_payload(&raw),
            Err(CodecError::Malformed {
                fopts_len: 3,
                available: 0
            })
        );
    }

    #[test]
    fn reference_hello_frame() {
        let raw = hex(HELLO);
        let decoded = decode_generic(&raw).unwrap();
        assert!(decoded.mic_ok);
        assert_eq!(decoded.plaintext, b"hello");
        assert_eq!(decoded.frame.dev_addr, 0x2601_1BDA);
        assert_eq!(decoded.frame.fcnt, 1);
        assert_eq!(decoded.frame.fport, Some(1));
        assert_eq!(
            encode_uplink(false, 0x2601_1BDA, 1, 1, b"hello", &SessionKeys::generic()),
            raw
        );
    }

    #[test]
    fn corrupted_mic_still_decrypts() {
        let mut raw = hex(HELLO);
        let last = raw.len() - 1;
        raw[last] ^= 0x01;
        let decoded = decode_generic(&raw).unwrap();
        assert!(!decoded.mic_ok);
        assert_eq!(decoded.plaintext, b"hello");
    }

    #[test]
    fn frame_without_port() {
        let frame = parse_phy_payload(&hex(NO_PORT)).unwrap();
        let data = frame.as_data().unwrap();
        assert_eq!(data.fport, None);
        assert!(data.frm_payload.is_empty());
        assert!(verify_mic(data, &GENERIC_KEY));
        assert_eq!(
            decrypt_frm_payload(data, &GENERIC_KEY),
            Err(CodecError::NoPayload)
        );
    }

    #[test]
    fn empty_payload_with_port() {
        let mut frame = DataFrame::uplink(false, 1, 2, vec![], Some(3), vec![]);
        frame.sign(&GENERIC_KEY);
        let parsed = parse_phy_payload(&frame.to_bytes()).unwrap();
        let data = parsed.as_data().unwrap();
        assert_eq!(
            decrypt_frm_payload(data, &GENERIC_KEY).unwrap(),
            Vec::<u8>::new()
        );
    }

    #[test]
    fn join_request_is_opaque() {
        let mut raw = vec![0x00];
        raw.extend_from_slice(&[0xAB; 22]);
        let parsed = parse_phy_payload(&raw).unwrap();
        assert_eq!(parsed.mhdr().mtype(), MType::JoinRequest);
        assert!(parsed.as_data().is_none());
        assert_eq!(parsed.to_bytes(), raw);
        assert_eq!(
            decode_generic(&raw).unwrap_err(),
            CodecError::NotDataFrame(MType::JoinRequest)
        );
    }

    #[test]
    fn mhdr_fields() {
        let m = Mhdr(0x80);
        assert_eq!(m.mtype(), MType::ConfirmedDataUp);
        assert!(m.is_lorawan_r1());
        assert!(!Mhdr(0x41).is_lorawan_r1());
        assert_eq!(Mhdr::new(MType::UnconfirmedDataUp, 0), Mhdr(0x40));
    }

    #[test]
    fn session_key_selection() {
        let keys = SessionKeys {
            nwk_s_key: [1; 16],
            app_s_key: [2; 16],
        };
        assert_eq!(keys.payload_key(0), &[1; 16]);
        assert_eq!(keys.payload_key(1), &[2; 16]);
    }
}
