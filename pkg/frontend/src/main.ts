import { App } from "./app";
import { HtmlAudioPlayer } from "./audio";
import { ApiClient } from "./client";

const root = document.getElementById("app");
if (root) {
  const app = new App(root, new ApiClient(location.origin), new HtmlAudioPlayer());
  void app.start();
}
