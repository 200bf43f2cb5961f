use sanbench_rules::{Board, CastleSide, Color, Piece, Role, Square};

fn color_name(c: Color) -> &'static str {
    match c {
        Color::White => "White",
        Color::Black => "Black",
    }
}

fn plural(role: Role, n: usize) -> String {
    if n == 1 {
        role.name().to_string()
    } else {
        format!("{}s", role.name())
    }
}

fn list(board: &Board, squares: &[Square]) -> String {
    let items: Vec<String> = squares
        .iter()
        .map(|&sq| format!("the {} on {sq}", board.piece_at(sq).expect("occupied").role.name()))
        .collect();
    match items.len() {
        0 => "nothing".to_string(),
        1 => items[0].clone(),
        n => format!("{} and {}", items[..n - 1].join(", "), items[n - 1]),
    }
}

/// Squares of enemy pieces the piece on `from` attacks.
fn targets(board: &Board, from: Square, piece: Piece) -> Vec<Square> {
    board
        .pieces()
        .filter(|(_, p)| p.color != piece.color)
        .filter(|(sq, _)| board.attackers(*sq, piece.color).contains(&from))
        .map(|(sq, _)| sq)
        .collect()
}

/// Natural-language description of the position: per side, piece counts,
/// one sentence per piece with its capture targets, attackers and
/// defenders, and castling rights. All three relations are geometric
/// (pins are ignored), and pieces are listed from a1 to h8.
pub fn describe_board(board: &Board) -> String {
    let mut out = String::new();
    // only a pawn that can really be taken en passant is flagged
    let ep_target = board
        .ep_square()
        .filter(|_| board.legal_moves().iter().any(|m| m.en_passant));
    for color in [Color::White, Color::Black] {
        let name = color_name(color);
        for role in Role::ALL {
            let n = board.count(color, role);
            out.push_str(&format!("{name} has {n} {} left.\n", plural(role, n)));
        }
        for (sq, piece) in board.pieces().filter(|(_, p)| p.color == color) {
            out.push_str(&format!(
                "A {} is on {sq}, can capture {}, can be captured by {}, and is defended by {}.",
                piece.role.name(),
                list(board, &targets(board, sq, piece)),
                list(board, &board.attackers(sq, color.opposite())),
                list(board, &board.attackers(sq, color)),
            ));
            if let Some(ep) = ep_target {
                let behind = ep.offset(0, if color == Color::White { 1 } else { -1 });
                if piece.role == Role::Pawn && behind == Some(sq) {
                    out.push_str(&format!(" It has just advanced two squares and can be captured en passant on {ep}."));
                }
            }
            out.push('\n');
        }
        for (side, word) in [(CastleSide::King, "kingside"), (CastleSide::Queen, "queenside")] {
            if board.castling().has(color, side) {
                out.push_str(&format!("{name} can castle {word}.\n"));
            } else {
                out.push_str(&format!("{name} cannot castle {word}.\n"));
            }
        }
    }
    out
}
