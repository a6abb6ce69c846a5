use crflow::model::{DeviceSpec, DriveFrequencyMode};

fn main() {
    let mut s = DeviceSpec::two_qubit(5114.0, 5114.0 + 165.0, -330.0, -330.0, 3.8, 50.0);
    s.drive.frequency = DriveFrequencyMode::BareTarget;
    match crflow::swpt::run_swpt(&s, 4) {
        Ok(_) => println!("no pole"),
        Err(e) => {
            println!("{e}");
            if let crflow::swpt::SwptError::Resonance { pole, order } = e {
                println!("order {order}");
                for (r, c, v) in &pole.entries {
                    // decode two-qubit indices (cutoff 4)
                    println!("  |c{} t{}> <c{} t{}| : {v}", r / 4, r % 4, c / 4, c % 4);
                }
            }
        }
    }
}
