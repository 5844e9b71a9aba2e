//! Start the WebSocket service on a free port and drive it with a scripted
//! client: hello, a few camera moves, export, shutdown.
//!
//! Pass `--wait` to keep the server up for an external client instead.

use std::sync::Arc;

use camnet::camera::Pose;
use camnet::discretize::{voxelize_box, WORLD_UP};
use camnet::scenes::harbour;
use camnet::session::protocol::{ClientMessage, ServerMessage};
use camnet::session::{decode_frame, serve, ServerConfig, SessionState};
use camnet::visibility::VisibilityMethod;
use camnet::Point3;
use tungstenite::Message;

fn main() -> camnet::Result<()> {
    let h = harbour(5000);
    let pose = |x: f64| Pose::look_at(Point3::new(x, -13.0, 12.0), Point3::new(0.0, 0.0, 0.0), WORLD_UP);
    let state = SessionState::new(
        Arc::new(h.mesh),
        Arc::new(voxelize_box(&h.roi)?),
        VisibilityMethod::Zbuffer,
        None,
        &[(h.spec, pose(-10.0)?), (h.spec, pose(10.0)?)],
    )?;
    let handle = serve(state, ServerConfig::local(0))?;
    println!("listening on {}", handle.url());
    if std::env::args().any(|a| a == "--wait") {
        println!("press enter to stop");
        std::io::stdin().read_line(&mut String::new())?;
        println!("{:?}", handle.shutdown()?.coverage);
        return Ok(());
    }

    let (mut ws, _) = tungstenite::connect(handle.url()).expect("connect");
    let send = |ws: &mut tungstenite::WebSocket<_>, m: &ClientMessage| {
        ws.send(Message::Text(serde_json::to_string(m).unwrap())).expect("send")
    };
    send(&mut ws, &ClientMessage::Hello { session: None });
    for x in [-6.0, -2.0, 2.0] {
        let p = pose(x)?;
        send(
            &mut ws,
            &ClientMessage::MoveCamera { id: 0, position: p.position.coords.into(), quaternion: p.quaternion_xyzw() },
        );
    }
    // Consecutive moves of one camera may be merged into a single revision.
    send(&mut ws, &ClientMessage::Export {});

    let mut blob_seen = false;
    loop {
        match ws.read().expect("read") {
            Message::Text(t) => match serde_json::from_str::<ServerMessage>(&t).unwrap() {
                ServerMessage::Solution { export } => {
                    println!("export at revision {}: coverage {:.3}", export.revision, export.coverage);
                    break;
                }
                ServerMessage::Status { revision, coverage, .. } => println!("status rev {revision}: {coverage:.3}"),
                other => println!("{}", serde_json::to_string(&other).unwrap()),
            },
            // The first binary message is the point positions, then frames.
            Message::Binary(b) if !blob_seen => {
                blob_seen = true;
                println!("point blob, {} bytes", b.len());
            }
            Message::Binary(b) => {
                let f = decode_frame(&b)?;
                println!("frame rev {} ({} points)", f.revision, f.n_points());
            }
            _ => {}
        }
    }
    ws.close(None).ok();
    handle.shutdown()?;
    Ok(())
}
