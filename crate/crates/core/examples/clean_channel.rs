//! Sends a few messages through CuMAC on a clean channel and prints how many
//! bits of each MAC the receiver has verified.

use cumac::mac::{key_gen, MacParams};
use cumac::schemes::{Delivery, Message, Receiver, SchemeKind, SchemeParams, Sender};

fn main() -> cumac::Result<()> {
    let params = SchemeParams::new(SchemeKind::CuMac, MacParams::new(128, 8, 16)?)?;
    let key = key_gen(128, Some(42))?;
    let mut tx = Sender::new(params.clone(), &key, Delivery::NoRetransmit)?;
    let mut rx = Receiver::new(params, &key)?;

    for value in 0..12i64 {
        for packet in tx.tag_gen(&Message::from_value_width(value * 7, 2)?)? {
            tx.ack(packet.counter, true)?;
            let outcome = rx.verify(&packet)?;
            println!("counter {:>2}: {:?}", packet.counter, outcome.verdict);
        }
    }
    for record in rx.finish() {
        println!("{:?}", record.report);
    }
    Ok(())
}
