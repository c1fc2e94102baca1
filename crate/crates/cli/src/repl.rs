use std::cell::RefCell;
use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::rc::Rc;

use aiql::complete::complete;
use aiql::validator::template_order;
use aiql::{JsonStyle, Schema, ValidatedQuery, VersionedModel};
use rustyline::completion::Completer;
use rustyline::error::ReadlineError;
use rustyline::highlight::Highlighter;
use rustyline::hint::Hinter;
use rustyline::history::DefaultHistory;
use rustyline::validate::Validator;
use rustyline::{Context, Editor, Helper};

use crate::pipeline::{self, CliError};

const HELP: &str = "\
Enter a query over one or more lines and finish it with a line holding only `;;`.
  :templates        templates of the last query, in evaluation order
  :schema           classes, attributes, references and shortcuts
  :complete <text>  completion proposals for <text>
  :help             this text
  :quit             leave";

struct QueryHelper {
    schema: Rc<Schema>,
    /// Lines of the query entered so far.
    pending: Rc<RefCell<String>>,
}

impl Completer for QueryHelper {
    type Candidate = String;

    fn complete(&self, line: &str, pos: usize, _: &Context<'_>) -> rustyline::Result<(usize, Vec<String>)> {
        let pending = self.pending.borrow();
        let text = format!("{pending}{}", &line[..pos]);
        let c = complete(&text, &self.schema);
        Ok((c.start.saturating_sub(pending.len()).min(pos), c.items))
    }
}

impl Hinter for QueryHelper {
    type Hint = String;
}
impl Highlighter for QueryHelper {}
impl Validator for QueryHelper {}
impl Helper for QueryHelper {}

enum Input {
    Editor(Box<Editor<QueryHelper, DefaultHistory>>),
    Plain(std::io::StdinLock<'static>),
}

impl Input {
    fn line(&mut self, prompt: &str) -> Result<Option<String>, CliError> {
        match self {
            Input::Editor(ed) => match ed.readline(prompt) {
                Ok(line) => {
                    let _ = ed.add_history_entry(line.as_str());
                    Ok(Some(line))
                }
                Err(ReadlineError::Eof | ReadlineError::Interrupted) => Ok(None),
                Err(e) => Err(CliError::Io(format!("cannot read input: {e}"))),
            },
            Input::Plain(stdin) => {
                let mut line = String::new();
                match stdin.read_line(&mut line) {
                    Ok(0) => Ok(None),
                    Ok(_) => Ok(Some(line.trim_end_matches(['\n', '\r']).to_string())),
                    Err(e) => Err(CliError::Io(format!("cannot read input: {e}"))),
                }
            }
        }
    }
}

struct Session {
    schema: Rc<Schema>,
    model: Option<VersionedModel>,
    last: Option<ValidatedQuery>,
}

impl Session {
    fn submit(&mut self, text: &str) {
        let q = match pipeline::check(text, "<repl>", &self.schema, false) {
            Ok(q) => q,
            Err(e) => {
                if let Some(m) = e.message() {
                    eprintln!("{m}");
                }
                return;
            }
        };
        let loaded;
        let model = match &self.model {
            Some(m) => m,
            None => {
                match pipeline::load_model(&pipeline::model_path(&q.ast.model_path, None), &self.schema) {
                    Ok(m) => {
                        loaded = m;
                        &loaded
                    }
                    Err(e) => {
                        eprintln!("{}", e.message().unwrap_or_default());
                        self.last = Some(q);
                        return;
                    }
                }
            }
        };
        match pipeline::run_validated(&q, model, &self.schema, JsonStyle::Pretty, false) {
            Ok(json) => println!("{json}"),
            Err(e) => eprintln!("{}", e.message().unwrap_or_default()),
        }
        self.last = Some(q);
    }

    /// Returns false when the session should end.
    fn meta(&mut self, line: &str) -> bool {
        let (cmd, arg) = line.split_once(' ').unwrap_or((line, ""));
        match cmd {
            ":quit" | ":q" | ":exit" => return false,
            ":help" => println!("{HELP}"),
            ":schema" => print!("{}", self.schema.describe()),
            ":templates" => match &self.last {
                None => println!("no query yet"),
                Some(q) => {
                    for ident in template_order(q) {
                        let t = &q.templates[q.template_index(ident).expect("known template")];
                        println!("{ident}: {}", t.class);
                    }
                }
            },
            ":complete" => {
                for item in complete(arg, &self.schema).items {
                    println!("{item}");
                }
            }
            other => eprintln!("unknown command `{other}`; try :help"),
        }
        true
    }
}

pub fn run(schema: Schema, model: Option<PathBuf>) -> Result<(), CliError> {
    let schema = Rc::new(schema);
    let model = match model {
        Some(p) => Some(pipeline::load_model(&p, &schema)?),
        None => None,
    };
    let pending = Rc::new(RefCell::new(String::new()));
    let interactive = std::io::stdin().is_terminal();
    let mut input = if interactive {
        let mut ed = Editor::<QueryHelper, DefaultHistory>::new()
            .map_err(|e| CliError::Internal(format!("cannot start line editor: {e}")))?;
        ed.set_helper(Some(QueryHelper {
            schema: Rc::clone(&schema),
            pending: Rc::clone(&pending),
        }));
        println!("aiql repl; :help for commands");
        Input::Editor(Box::new(ed))
    } else {
        Input::Plain(std::io::stdin().lock())
    };
    let mut session = Session {
        schema,
        model,
        last: None,
    };
    loop {
        let prompt = if pending.borrow().is_empty() {
            "aiql> "
        } else {
            "  ... "
        };
        let Some(line) = input.line(prompt)? else { break };
        let trimmed = line.trim();
        if pending.borrow().is_empty() && trimmed.starts_with(':') {
            if !session.meta(trimmed) {
                break;
            }
        } else if trimmed == ";;" {
            let text = std::mem::take(&mut *pending.borrow_mut());
            if !text.trim().is_empty() {
                session.submit(&text);
            }
        } else if !(pending.borrow().is_empty() && trimmed.is_empty()) {
            let mut p = pending.borrow_mut();
            p.push_str(&line);
            p.push('\n');
        }
        let _ = std::io::stdout().flush();
    }
    Ok(())
}
