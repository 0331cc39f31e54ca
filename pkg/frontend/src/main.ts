import { ApiClient } from "./api.js";
import { boot } from "./app.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? "";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

void boot(root, new ApiClient(base));
