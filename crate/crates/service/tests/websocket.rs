use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use misaka_core::session::{EventFrame, ScenarioConfig, Session};
use misaka_service::{bind, serve, ServeError, ServiceConfig};
use serde_json::Value;
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Client = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(session: Session, config: ServiceConfig) -> u16 {
    let listener = bind(0).await.unwrap();
    let port = listener.local_addr().unwrap().port();
    tokio::spawn(serve(listener, session, config));
    port
}

async fn connect(port: u16) -> Client {
    let (ws, _) = connect_async(format!("ws://127.0.0.1:{port}/ws")).await.unwrap();
    ws
}

async fn next_json(ws: &mut Client) -> Value {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(10), ws.next())
            .await
            .expect("server went quiet")
            .expect("stream ended")
            .unwrap();
        if let Message::Text(text) = msg {
            return serde_json::from_str(text.as_str()).unwrap();
        }
    }
}

async fn next_frame(ws: &mut Client) -> EventFrame {
    loop {
        let v = next_json(ws).await;
        if v.get("error").is_none() {
            return serde_json::from_value(v).unwrap();
        }
    }
}

async fn frame_where(ws: &mut Client, pred: impl Fn(&EventFrame) -> bool) -> EventFrame {
    for _ in 0..5000 {
        let f = next_frame(ws).await;
        if pred(&f) {
            return f;
        }
    }
    panic!("condition never held");
}

async fn send(ws: &mut Client, cmd: Value) {
    ws.send(Message::Text(cmd.to_string().into())).await.unwrap();
}

fn fast() -> ServiceConfig {
    ServiceConfig {
        tick_hz: 200.0,
        interval_ms: 10.0,
    }
}

#[tokio::test]
async fn dispatch3_first_frame_lists_nodes_and_messengers() {
    let session = Session::new(ScenarioConfig::built_in("dispatch3").unwrap()).unwrap();
    let port = start(session, ServiceConfig::default()).await;
    let mut ws = connect(port).await;
    let f = next_frame(&mut ws).await;
    assert_eq!(f.frame, 1);
    assert_eq!(f.iteration, 0);
    assert_eq!(f.values, vec![5.0, 2.0, 1.0]);
    assert_eq!(f.robots.len(), 7);
}

#[tokio::test]
async fn empty_session_waits_for_commands() {
    let port = start(Session::empty(), ServiceConfig::default()).await;
    let mut ws = connect(port).await;
    let f = next_frame(&mut ws).await;
    assert!(f.robots.is_empty());
    assert_eq!(f.iteration, 0);
    send(&mut ws, serde_json::json!({"cmd": "add_node", "x_mm": 500.0, "y_mm": 350.0})).await;
    let f = frame_where(&mut ws, |f| f.robots.len() == 1).await;
    assert_eq!(f.values, vec![5.0]);
}

#[tokio::test]
async fn frames_are_gapless_per_connection() {
    let session = Session::new(ScenarioConfig::built_in("case1").unwrap()).unwrap();
    let port = start(session, fast()).await;
    let mut a = connect(port).await;
    let mut b = connect(port).await;
    for ws in [&mut a, &mut b] {
        for expected in 1..=30 {
            assert_eq!(next_frame(ws).await.frame, expected);
        }
    }
}

#[tokio::test]
async fn rejected_commands_report_and_change_nothing() {
    let session = Session::new(ScenarioConfig::built_in("case2").unwrap()).unwrap();
    let port = start(session, ServiceConfig::default()).await;
    let mut ws = connect(port).await;
    let before = next_frame(&mut ws).await;
    send(&mut ws, serde_json::json!({"cmd": "set_edge", "from": 9, "to": 9, "present": false})).await;
    let reply = loop {
        let v = next_json(&mut ws).await;
        if v.get("error").is_some() {
            break v;
        }
    };
    assert_eq!(reply["cmd"], "set_edge");
    send(&mut ws, serde_json::json!({"cmd": "fly"})).await;
    let reply = loop {
        let v = next_json(&mut ws).await;
        if v.get("error").is_some() {
            break v;
        }
    };
    assert!(reply["error"].as_str().unwrap().contains("malformed"));
    let after = next_frame(&mut ws).await;
    assert_eq!(after.values, before.values);
    assert_eq!(after.robots.len(), before.robots.len());
}

/// Drag node 4 of a running case 1 session to the height of value 10, then
/// add and remove a node, checking each restart and re-convergence.
#[tokio::test]
async fn interaction_loop_restarts_and_reconverges() {
    let session = Session::new(ScenarioConfig::built_in("case1").unwrap()).unwrap();
    let port = start(session, fast()).await;
    let mut ws = connect(port).await;
    let first = next_frame(&mut ws).await;
    send(&mut ws, serde_json::json!({"cmd": "start"})).await;
    frame_where(&mut ws, |f| f.iteration >= 3).await;

    let node4 = first.robots[3].id;
    send(&mut ws, serde_json::json!({"cmd": "move_robot", "id": node4, "x_mm": 950.0, "y_mm": 650.0})).await;
    let restarted = frame_where(&mut ws, |f| f.values[3] == 10.0).await;
    assert!(restarted.iteration <= 1);
    let done = frame_where(&mut ws, |f| f.converged).await;
    let spread = done.values.iter().cloned().fold(f64::MIN, f64::max) - done.values.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-6);
    assert!(done.values[0] > 2.46, "limit moved up after the drag: {:?}", done.values);

    send(
        &mut ws,
        serde_json::json!({"cmd": "add_node", "x_mm": 500.0, "y_mm": 50.0, "reads": [4], "read_by": [1]}),
    )
    .await;
    let grown = frame_where(&mut ws, |f| f.values.len() == 5).await;
    assert!(grown.iteration <= 1);
    assert_eq!(grown.values[4], 0.0);
    frame_where(&mut ws, |f| f.values.len() == 5 && f.converged).await;

    send(&mut ws, serde_json::json!({"cmd": "remove_node", "node": 5})).await;
    let shrunk = frame_where(&mut ws, |f| f.values.len() == 4).await;
    assert!(shrunk.iteration <= 1);
    assert_eq!(shrunk.robots.len(), 4);
    frame_where(&mut ws, |f| f.values.len() == 4 && f.converged).await;
}

#[tokio::test]
async fn latest_frame_over_http() {
    let session = Session::new(ScenarioConfig::built_in("case1").unwrap()).unwrap();
    let port = start(session, ServiceConfig::default()).await;
    let mut stream = TcpStream::connect(("127.0.0.1", port)).await.unwrap();
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    stream
        .write_all(b"GET /frame HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut body = String::new();
    stream.read_to_string(&mut body).await.unwrap();
    assert!(body.starts_with("HTTP/1.1 200"));
    assert!(body.contains("\"values\":[1.0,2.0,3.0,4.0]"));
}

#[tokio::test]
async fn occupied_port_is_reported() {
    let held = bind(0).await.unwrap();
    let port = held.local_addr().unwrap().port();
    match bind(port).await {
        Err(ServeError::PortInUse { port: p }) => assert_eq!(p, port),
        other => panic!("expected PortInUse, got {other:?}"),
    }
}
